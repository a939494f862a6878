#pragma once

#include "edastress/features.hpp"
#include "edastress/learners.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edastress {

// (TPR + TNR) / 2 from the confusion matrix. y_true must contain both
// classes, otherwise the score is undefined and a protocol error is raised.
double balanced_accuracy(std::span<const std::uint8_t> y_true,
                         std::span<const std::uint8_t> y_pred);

enum class Protocol { user_dependent, user_independent };

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

// One balanced-accuracy observation; the unit of the statistical analysis.
struct BAScore {
    std::string dataset;
    std::string subject_id;
    Family family = Family::lr;
    Protocol protocol = Protocol::user_dependent;
    double balanced_accuracy = 0.0;
};

enum class SplitStrategy { stratified_holdout, logo };

struct SplitPlan {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    SplitStrategy strategy = SplitStrategy::stratified_holdout;
    std::string held_out_subject; // LOGO only
};

// Per-class test counts = round(test_frac * n_c), at least 1 and at most
// n_c - 1; selection is uniform given the seed. Classes with fewer than two
// rows make the split infeasible.
SplitPlan stratified_split(std::span<const std::uint8_t> labels, double test_frac,
                           std::uint64_t seed);

// One plan per subject: test = that subject's rows, train = everyone else.
std::vector<SplitPlan> logo_splits(std::span<const std::string> row_subjects);

struct SkipEntry {
    std::string dataset;
    std::string subject_id;
    std::string family;   // empty when the whole subject was skipped
    std::string protocol;
    std::string reason;
};

struct EvalOptions {
    double test_frac = 0.286;
    TrainOptions train;
    int threads = 1;
};

struct EvalResult {
    std::vector<BAScore> scores; // canonical (dataset, subject, family) order
    std::vector<SkipEntry> skips;
};

// Per subject: stratified split, grid search on the training part, balanced
// accuracy on the held-out part; one score per (subject, family).
EvalResult run_user_dependent(const std::vector<WindowFeatures>& rows,
                              const std::string& dataset,
                              const std::vector<Family>& families,
                              std::uint64_t seed, const EvalOptions& options = {});

// LOGO: grid search on the pooled other-subject windows, scored on the
// held-out subject and attributed to it.
EvalResult run_user_independent(const std::vector<WindowFeatures>& rows,
                                const std::string& dataset,
                                const std::vector<Family>& families,
                                std::uint64_t seed, const EvalOptions& options = {});

// Score table: `dataset,subject_id,family,protocol,balanced_accuracy`.
void write_scores_csv(const std::filesystem::path& path, const std::vector<BAScore>& scores);
std::vector<BAScore> load_scores_csv(const std::filesystem::path& path);
void write_skips_csv(const std::filesystem::path& path, const std::vector<SkipEntry>& skips);

} // namespace edastress
