#include "edastress/learners.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "edastress/protocol.hpp"
#include "learner_impls.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace edastress {

std::string family_name(Family f) {
    switch (f) {
    case Family::lr: return "lr";
    case Family::rf: return "rf";
    case Family::svm: return "svm";
    case Family::mlp: return "mlp";
    case Family::knn: return "knn";
    }
    return "lr";
}

Family family_from_name(const std::string& name) {
    if (name == "lr") return Family::lr;
    if (name == "rf") return Family::rf;
    if (name == "svm") return Family::svm;
    if (name == "mlp") return Family::mlp;
    if (name == "knn") return Family::knn;
    throw_usage("unknown model family '" + name + "'");
}

std::vector<Family> all_families() {
    return {Family::lr, Family::rf, Family::svm, Family::mlp, Family::knn};
}

bool family_standardizes(Family f) {
    return f == Family::svm || f == Family::mlp || f == Family::knn;
}

std::string ModelSpec::describe() const {
    std::ostringstream os;
    os << family_name(family);
    const char* cw = class_weight == WeightMode::balance ? "balance" : "none";
    switch (family) {
    case Family::lr:
    case Family::svm:
        os << "(C=" << C << ",class_weight=" << cw << ")";
        break;
    case Family::rf:
        os << "(n_estimators=" << n_estimators << ",min_samples_split=" << min_samples_split
           << ",min_samples_leaf=" << min_samples_leaf << ",class_weight=" << cw << ")";
        break;
    case Family::mlp:
        os << "(hidden=" << hidden_units << ")";
        break;
    case Family::knn:
        os << "(k=" << n_neighbors << ",weights="
           << (knn_weights == KnnWeighting::uniform ? "uniform" : "distance") << ")";
        break;
    }
    return os.str();
}

std::vector<ModelSpec> grid_specs(Family f) {
    static const double kCValues[] = {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 10.0};
    static const WeightMode kWeightModes[] = {WeightMode::none, WeightMode::balance};

    std::vector<ModelSpec> grid;
    switch (f) {
    case Family::lr:
    case Family::svm:
        for (double c : kCValues) {
            for (WeightMode w : kWeightModes) {
                ModelSpec s;
                s.family = f;
                s.C = c;
                s.class_weight = w;
                grid.push_back(s);
            }
        }
        break;
    case Family::rf:
        for (int n_est : {500, 1000}) {
            for (int mss : {2, 4}) {
                for (int msl : {1, 4}) {
                    for (WeightMode w : kWeightModes) {
                        ModelSpec s;
                        s.family = f;
                        s.n_estimators = n_est;
                        s.min_samples_split = mss;
                        s.min_samples_leaf = msl;
                        s.class_weight = w;
                        grid.push_back(s);
                    }
                }
            }
        }
        break;
    case Family::mlp:
        for (int h : {64, 128, 256, 512}) {
            ModelSpec s;
            s.family = f;
            s.hidden_units = h;
            grid.push_back(s);
        }
        break;
    case Family::knn:
        for (int k : {3, 5, 7}) {
            for (KnnWeighting w : {KnnWeighting::uniform, KnnWeighting::distance}) {
                ModelSpec s;
                s.family = f;
                s.n_neighbors = k;
                s.knn_weights = w;
                grid.push_back(s);
            }
        }
        break;
    }
    return grid;
}

ClassWeights compute_class_weights(std::span<const std::uint8_t> y, WeightMode mode) {
    std::size_t n1 = 0;
    for (std::uint8_t v : y) n1 += v;
    const std::size_t n0 = y.size() - n1;
    if (n0 == 0 || n1 == 0) {
        throw_protocol("class weights need both classes present");
    }
    if (mode == WeightMode::none) return {1.0, 1.0};
    const double n = static_cast<double>(y.size());
    return {n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.std.assign(x.cols, 0.0);
    if (x.rows == 0) return s;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += row[j];
    }
    for (double& m : s.mean) m /= static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = row[j] - s.mean[j];
            s.std[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
        double sd = std::sqrt(s.std[j] / static_cast<double>(x.rows));
        // Constant columns pass through centered only; the threshold absorbs
        // rounding residue from the mean subtraction.
        if (sd <= 1e-12 * std::max(1.0, std::abs(s.mean[j]))) sd = 0.0;
        s.std[j] = sd;
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* row = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) {
            row[j] -= mean[j];
            if (std[j] > 0.0) row[j] /= std[j];
        }
    }
    return out;
}

namespace {

void check_training_inputs(const Matrix& x, std::span<const std::uint8_t> y) {
    if (x.rows != y.size() || x.rows < 2) {
        throw_protocol("training needs matching X/y with at least 2 rows");
    }
    for (double v : x.data) {
        if (!std::isfinite(v)) throw_data("training features contain non-finite values");
    }
    std::size_t n1 = 0;
    for (std::uint8_t v : y) n1 += v;
    if (n1 == 0 || n1 == y.size()) {
        throw_protocol("training needs both classes present");
    }
}

std::vector<double> sample_weights(std::span<const std::uint8_t> y, const ClassWeights& cw) {
    std::vector<double> sw(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) sw[i] = y[i] ? cw.w1 : cw.w0;
    return sw;
}

} // namespace

TrainedModel train(const ModelSpec& spec, const Matrix& x,
                   std::span<const std::uint8_t> y, std::uint64_t seed,
                   const TrainOptions& options) {
    check_training_inputs(x, y);

    TrainedModel model;
    model.spec = spec;
    model.n_features = x.cols;
    model.meta.seed = seed;

    const Matrix* train_x = &x;
    Matrix standardized;
    if (family_standardizes(spec.family)) {
        model.standardizer = Standardizer::fit(x);
        standardized = model.standardizer->transform(x);
        train_x = &standardized;
    }

    const ClassWeights cw = compute_class_weights(y, spec.class_weight);
    const auto sw = sample_weights(y, cw);

    std::unique_ptr<ModelImpl> impl;
    switch (spec.family) {
    case Family::lr:
        impl = detail::train_logistic(*train_x, y, sw, spec.C, spec.describe());
        break;
    case Family::svm:
        impl = options.svm_rbf_kernel
                   ? detail::train_rbf_svm(*train_x, y, sw, spec.C, seed)
                   : detail::train_linear_svm(*train_x, y, sw, spec.C, seed);
        break;
    case Family::rf:
        impl = detail::train_forest(*train_x, y, cw, spec, seed);
        break;
    case Family::mlp: {
        // Table 1 lists no class_weight row for MLP, so weighting is off
        // unless explicitly enabled.
        const ClassWeights mlp_cw = options.mlp_class_weight
            ? compute_class_weights(y, WeightMode::balance)
            : ClassWeights{1.0, 1.0};
        impl = detail::train_mlp(*train_x, y, sample_weights(y, mlp_cw),
                                 spec.hidden_units, seed, spec.describe());
        break;
    }
    case Family::knn:
        impl = detail::train_knn(*train_x, y, spec.n_neighbors, spec.knn_weights);
        break;
    }
    model.impl = std::move(impl);
    return model;
}

std::vector<std::uint8_t> predict(const TrainedModel& model, const Matrix& x) {
    if (x.rows == 0) return {};
    if (x.cols != model.n_features) {
        throw_protocol("predict: feature dimensionality " + std::to_string(x.cols) +
                       " does not match training (" + std::to_string(model.n_features) + ")");
    }
    if (model.standardizer) {
        return model.impl->predict(model.standardizer->transform(x));
    }
    return model.impl->predict(x);
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const std::uint8_t> y,
                                                       int k, std::uint64_t seed) {
    std::vector<std::size_t> idx0, idx1;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? idx1 : idx0).push_back(i);

    Rng rng(derive_seed(seed, fnv1a64("folds")));
    rng.shuffle(idx0);
    rng.shuffle(idx1);

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx0.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(idx0[i]);
    for (std::size_t i = 0; i < idx1.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(idx1[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

TrainedModel grid_search(Family family, const Matrix& x,
                         std::span<const std::uint8_t> y, std::uint64_t seed,
                         const TrainOptions& options) {
    const auto grid = grid_specs(family);
    return grid_search(grid, x, y, seed, options);
}

TrainedModel grid_search(std::span<const ModelSpec> candidates, const Matrix& x,
                         std::span<const std::uint8_t> y, std::uint64_t seed,
                         const TrainOptions& options) {
    if (candidates.empty()) throw_protocol("grid search needs a non-empty grid");
    check_training_inputs(x, y);

    std::size_t n1 = 0;
    for (std::uint8_t v : y) n1 += v;
    const std::size_t n_min = std::min(n1, y.size() - n1);

    int k = 5;
    if (n_min < 5) k = 3;
    if (n_min < 3) {
        throw_protocol("grid search needs at least 3 rows of each class, got " +
                       std::to_string(n_min));
    }

    const auto folds = stratified_folds(y, k, seed);
    const std::span<const ModelSpec> grid = candidates;

    std::vector<std::vector<std::size_t>> train_sets(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (std::find(folds[f].begin(), folds[f].end(), i) == folds[f].end()) {
                train_sets[f].push_back(i);
            }
        }
    }

    double best_ba = -1.0;
    int best_index = -1;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double ba_sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const Matrix x_train = x.select_rows(train_sets[f]);
            const Matrix x_test = x.select_rows(folds[f]);
            std::vector<std::uint8_t> y_train, y_test;
            for (std::size_t i : train_sets[f]) y_train.push_back(y[i]);
            for (std::size_t i : folds[f]) y_test.push_back(y[i]);

            const TrainedModel m = train(grid[g], x_train, y_train,
                                         derive_seed(seed, fnv1a64("cv-fit"), f), options);
            ba_sum += balanced_accuracy(y_test, predict(m, x_test));
        }
        const double ba = ba_sum / static_cast<double>(folds.size());
        if (ba > best_ba) { // strict: ties keep the earlier grid point
            best_ba = ba;
            best_index = static_cast<int>(g);
        }
    }

    TrainedModel winner = train(grid[static_cast<std::size_t>(best_index)], x, y,
                                derive_seed(seed, fnv1a64("refit")), options);
    winner.meta.seed = seed;
    winner.meta.cv_folds_used = k;
    winner.meta.inner_cv_ba = best_ba;
    winner.meta.grid_index = best_index;
    return winner;
}

namespace {

nlohmann::ordered_json spec_to_json(const ModelSpec& s) {
    nlohmann::ordered_json j;
    j["family"] = family_name(s.family);
    j["C"] = s.C;
    j["class_weight"] = s.class_weight == WeightMode::balance ? "balance" : "none";
    j["n_estimators"] = s.n_estimators;
    j["min_samples_split"] = s.min_samples_split;
    j["min_samples_leaf"] = s.min_samples_leaf;
    j["hidden_units"] = s.hidden_units;
    j["n_neighbors"] = s.n_neighbors;
    j["knn_weights"] = s.knn_weights == KnnWeighting::uniform ? "uniform" : "distance";
    return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
    ModelSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    s.C = j.at("C").get<double>();
    s.class_weight = j.at("class_weight").get<std::string>() == "balance"
        ? WeightMode::balance : WeightMode::none;
    s.n_estimators = j.at("n_estimators").get<int>();
    s.min_samples_split = j.at("min_samples_split").get<int>();
    s.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    s.hidden_units = j.at("hidden_units").get<int>();
    s.n_neighbors = j.at("n_neighbors").get<int>();
    s.knn_weights = j.at("knn_weights").get<std::string>() == "uniform"
        ? KnnWeighting::uniform : KnnWeighting::distance;
    return s;
}

} // namespace

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "edastress-model-v1";
    j["spec"] = spec_to_json(model.spec);
    j["n_features"] = model.n_features;
    if (model.standardizer) {
        j["standardizer"] = {{"mean", model.standardizer->mean},
                             {"std", model.standardizer->std}};
    } else {
        j["standardizer"] = nullptr;
    }
    j["meta"] = {{"seed", model.meta.seed},
                 {"cv_folds_used", model.meta.cv_folds_used},
                 {"inner_cv_ba", model.meta.inner_cv_ba},
                 {"grid_index", model.meta.grid_index}};
    j["params"] = model.impl->params_json();

    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_data("malformed model file " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "edastress-model-v1") {
        throw_data(path.string() + ": unsupported model format");
    }

    TrainedModel model;
    model.spec = spec_from_json(j.at("spec"));
    model.n_features = j.at("n_features").get<std::size_t>();
    if (!j.at("standardizer").is_null()) {
        Standardizer s;
        s.mean = j["standardizer"].at("mean").get<std::vector<double>>();
        s.std = j["standardizer"].at("std").get<std::vector<double>>();
        model.standardizer = std::move(s);
    }
    model.meta.seed = j.at("meta").at("seed").get<std::uint64_t>();
    model.meta.cv_folds_used = j.at("meta").at("cv_folds_used").get<int>();
    model.meta.inner_cv_ba = j.at("meta").at("inner_cv_ba").get<double>();
    model.meta.grid_index = j.at("meta").at("grid_index").get<int>();

    const auto& params = j.at("params");
    const std::string kind = params.at("kind").get<std::string>();
    if (kind == "linear") model.impl = detail::linear_from_json(params);
    else if (kind == "rbf_svm") model.impl = detail::rbf_from_json(params);
    else if (kind == "forest") model.impl = detail::forest_from_json(params);
    else if (kind == "mlp") model.impl = detail::mlp_from_json(params);
    else if (kind == "knn") model.impl = detail::knn_from_json(params);
    else throw_data(path.string() + ": unknown model kind '" + kind + "'");
    return model;
}

} // namespace edastress
