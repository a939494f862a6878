#pragma once

#include "edastress/matrix.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edastress {

enum class Family { lr, rf, svm, mlp, knn };

std::string family_name(Family f);
Family family_from_name(const std::string& name);
std::vector<Family> all_families();

// SVM, MLP and KNN operate on standardized features; LR and RF do not.
bool family_standardizes(Family f);

enum class WeightMode { none, balance };

struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;
};

// balance mode: w_c = N / (2 * n_c). Requires both classes present.
ClassWeights compute_class_weights(std::span<const std::uint8_t> y, WeightMode mode);

// Per-feature standardization fitted on training rows only. Constant
// columns are centered but not scaled.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;

    static Standardizer fit(const Matrix& x);
    Matrix transform(const Matrix& x) const;
};

enum class KnnWeighting { uniform, distance };

// One grid point. Only the fields of the active family are meaningful.
struct ModelSpec {
    Family family = Family::lr;
    double C = 1.0;                               // LR, SVM
    WeightMode class_weight = WeightMode::none;   // LR, SVM, RF (MLP behind flag)
    int n_estimators = 500;                       // RF
    int min_samples_split = 2;                    // RF
    int min_samples_leaf = 1;                     // RF
    int hidden_units = 64;                        // MLP
    int n_neighbors = 3;                          // KNN
    KnnWeighting knn_weights = KnnWeighting::uniform;

    std::string describe() const;
};

// The full hyperparameter grid of one family, in declaration order (the
// first listed parameter varies slowest). Ties in model selection are broken
// by this order.
std::vector<ModelSpec> grid_specs(Family f);
inline constexpr const char* kGridVersion = "table1-v1";

struct TrainOptions {
    bool svm_rbf_kernel = false;  // default: linear kernel
    bool mlp_class_weight = false; // default mirrors the grid (no weighting)
};

class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    // X must already be standardized when the family requires it.
    virtual std::vector<std::uint8_t> predict(const Matrix& x) const = 0;
    virtual nlohmann::ordered_json params_json() const = 0;
};

struct TrainMeta {
    std::uint64_t seed = 0;
    int cv_folds_used = 0;  // 0 when no inner grid search ran
    double inner_cv_ba = 0.0;
    int grid_index = -1;
};

struct TrainedModel {
    ModelSpec spec;
    std::size_t n_features = 0;
    std::optional<Standardizer> standardizer;
    std::shared_ptr<const ModelImpl> impl;
    TrainMeta meta;
};

// Fits one grid point. Applies standardization internally when the family
// requires it (fitted on x only). Deterministic given (spec, x, y, seed).
TrainedModel train(const ModelSpec& spec, const Matrix& x,
                   std::span<const std::uint8_t> y, std::uint64_t seed,
                   const TrainOptions& options = {});

std::vector<std::uint8_t> predict(const TrainedModel& model, const Matrix& x);

// Evaluates every grid point of the family by stratified k-fold
// cross-validated balanced accuracy (k = 5, falling back to 3 when a class
// has fewer than 5 rows), picks the best point (ties: declaration order),
// and refits it on all rows.
TrainedModel grid_search(Family family, const Matrix& x,
                         std::span<const std::uint8_t> y, std::uint64_t seed,
                         const TrainOptions& options = {});

// Same search over an explicit candidate list (all of one family).
TrainedModel grid_search(std::span<const ModelSpec> candidates, const Matrix& x,
                         std::span<const std::uint8_t> y, std::uint64_t seed,
                         const TrainOptions& options = {});

// Deterministic stratified fold assignment; every fold keeps both classes
// when each class has at least k rows.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const std::uint8_t> y,
                                                       int k, std::uint64_t seed);

// Versioned JSON model files (random forests as explicit node lists).
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

namespace detail {

// Loss/gradient entry points used by the finite-difference checks.

// L2-regularized weighted logistic loss at wb = [w_0..w_{d-1}, b];
// y is +-1, sw the per-sample weight. Returns the loss, writes the gradient.
double logistic_loss_grad(std::span<const double> wb, const Matrix& x,
                          std::span<const int> y_pm, std::span<const double> sw,
                          double c, std::span<double> grad_out);

// One-hidden-layer MLP (ReLU, logistic output) weighted cross-entropy over
// the whole batch. Parameter layout: [W1 (h x d), b1 (h), w2 (h), b2].
double mlp_loss_grad(std::span<const double> params, int hidden,
                     const Matrix& x, std::span<const std::uint8_t> y,
                     std::span<const double> sw, std::span<double> grad_out);

std::size_t mlp_param_count(std::size_t d, int hidden);

} // namespace detail

} // namespace edastress
