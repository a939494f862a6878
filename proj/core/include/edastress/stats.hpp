#pragma once

#include "edastress/protocol.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edastress {

enum class Alternative { two_sided, less, greater };

std::string alternative_name(Alternative a);

// Shapiro-Wilk W and p-value (order-statistic weight approximation with the
// canonical small-n handling; valid for 3 <= n <= 5000).
struct ShapiroResult {
    double w = 0.0;
    double p_value = 0.0;
};
ShapiroResult shapiro_wilk(std::span<const double> sample);

// Critical values at significance {15%, 10%, 5%, 2.5%, 1%} for the
// estimated-parameters (normality) case. Published tables disagree, so two
// are shipped; `paper` is the default and carries 0.722 at the 5% level.
enum class AdTable { paper, stephens };

struct AndersonDarlingResult {
    double a2 = 0.0;           // corrected statistic A2 * (1 + 0.75/n + 2.25/n^2)
    double a2_uncorrected = 0.0;
    std::array<double, 5> critical_values{};
    std::array<double, 5> significance_levels{}; // percent
};
AndersonDarlingResult anderson_darling_normal(std::span<const double> sample,
                                              AdTable table = AdTable::paper);

struct NormalityReport {
    double shapiro_w = 0.0;
    double shapiro_p = 0.0;
    double ad_statistic = 0.0;
    double ad_critical_005 = 0.0;
    bool normal_at_005 = false;
};
NormalityReport normality_report(std::span<const double> sample,
                                 AdTable table = AdTable::paper);

struct HypothesisTestResult {
    std::string test_name;
    Alternative alternative = Alternative::two_sided;
    double statistic = 0.0;   // Mann-Whitney U of the first sample
    double rank_sum_w = 0.0;  // rank sum of the first sample, printed alongside U
    double p_value = 1.0;
    double alpha = 0.05;
    double ci_level = 0.95;
    double ci_low = 0.0;      // +-infinity on the unconstrained side
    double ci_high = 0.0;
    double point_estimate = 0.0; // Hodges-Lehmann median of pairwise differences
    std::optional<double> effect_size; // |z| / sqrt(n1 + n2)
    bool reject_null = false; // p_value < alpha
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool exact = false;       // enumeration (n1+n2 <= 20, tie-free) vs normal approx
};

// Two-sample Wilcoxon rank-sum (Mann-Whitney) test with Hodges-Lehmann point
// estimate and a shift confidence interval by rank-test inversion. The CI
// level defaults to 1 - alpha; pass ci_level to decouple them.
HypothesisTestResult wilcoxon_rank_sum(std::span<const double> x,
                                       std::span<const double> y,
                                       Alternative alternative, double alpha,
                                       std::optional<double> ci_level = std::nullopt);

// Median of all n1*n2 pairwise differences x_i - y_j.
double hodges_lehmann(std::span<const double> x, std::span<const double> y);

namespace wilcoxon_detail {
// Null distribution of U for sample sizes (n1, n2) without ties:
// counts[u] = number of rank arrangements with U == u. Exposed for the
// enumeration-oracle tests.
std::vector<double> exact_u_counts(std::size_t n1, std::size_t n2);
} // namespace wilcoxon_detail

struct QqPoint {
    double theoretical_q = 0.0;
    double sample_q = 0.0;
};

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

std::vector<QqPoint> qq_points(std::span<const double> sample);
std::vector<HistogramBin> histogram_bins(std::span<const double> values);

struct GroupAnalysis {
    std::string name;
    std::vector<double> values;
    NormalityReport normality;
    std::vector<QqPoint> qq;
};

// Report produced by both hypothesis pipelines. `paired_differences` holds
// group A minus group B matched on (dataset, subject, family).
struct HypothesisReport {
    int hypothesis = 0;
    GroupAnalysis group_a;
    GroupAnalysis group_b;
    NormalityReport diff_normality;
    std::vector<double> paired_differences;
    std::vector<HistogramBin> diff_histogram;
    HypothesisTestResult test;
    // Same test seen from the mirrored orientation (B - A): the convention
    // the original analysis printed for the dependent-vs-independent result.
    double mirrored_statistic = 0.0;
    double mirrored_hl = 0.0;
    double mirrored_ci_low = 0.0;
    double mirrored_ci_high = 0.0;
    std::string decision;
};

struct Hypothesis1Options {
    double alpha = 0.001;
    double ci_level = 0.99;
    AdTable ad_table = AdTable::paper;
};

// One-sided comparison (user-dependent greater than user-independent) on two
// score tables paired by (dataset, subject, family).
HypothesisReport run_hypothesis1(const std::vector<BAScore>& ba_user_dependent,
                                 const std::vector<BAScore>& ba_user_independent,
                                 const Hypothesis1Options& options = {});

struct Hypothesis2Options {
    double alpha = 0.05;
    double ci_level = 0.95;
    AdTable ad_table = AdTable::paper;
};

// Two-sided comparison of user-dependent scores from a high-resolution
// versus a low-resolution recording of the same subjects.
HypothesisReport run_hypothesis2(const std::vector<BAScore>& ba_group_a,
                                 const std::vector<BAScore>& ba_group_b,
                                 const Hypothesis2Options& options = {});

} // namespace edastress
