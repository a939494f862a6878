#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "learner_impls.hpp"

#include <cmath>
#include <numeric>

namespace edastress::detail {

namespace {
constexpr int kMaxEpochs = 1000;
constexpr double kPgTol = 1e-6;
} // namespace

// Dual coordinate descent for the weighted L1-loss (hinge) linear SVM.
// The bias enters as an augmented constant feature, so it is part of the
// regularized norm.
std::unique_ptr<ModelImpl> train_linear_svm(const Matrix& x, std::span<const std::uint8_t> y,
                                            std::span<const double> sw, double c,
                                            std::uint64_t seed) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;

    std::vector<double> upper(n), qii(n);
    std::vector<int> y_pm(n);
    for (std::size_t i = 0; i < n; ++i) {
        y_pm[i] = y[i] ? 1 : -1;
        upper[i] = c * sw[i];
        const double* xi = x.row(i);
        double q = 1.0; // augmented bias feature
        for (std::size_t j = 0; j < d; ++j) q += xi[j] * xi[j];
        qii[i] = q;
    }

    std::vector<double> alpha(n, 0.0), w(d, 0.0);
    double b = 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, fnv1a64("svm-cd")));

    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
        rng.shuffle(order);
        double max_pg = 0.0;
        for (std::size_t i : order) {
            const double* xi = x.row(i);
            double f = b;
            for (std::size_t j = 0; j < d; ++j) f += w[j] * xi[j];
            const double g = y_pm[i] * f - 1.0;

            double pg = g;
            if (alpha[i] <= 0.0 && g > 0.0) pg = 0.0;
            if (alpha[i] >= upper[i] && g < 0.0) pg = 0.0;
            max_pg = std::max(max_pg, std::abs(pg));
            if (pg == 0.0) continue;

            const double alpha_new = std::clamp(alpha[i] - g / qii[i], 0.0, upper[i]);
            const double delta = (alpha_new - alpha[i]) * y_pm[i];
            alpha[i] = alpha_new;
            for (std::size_t j = 0; j < d; ++j) w[j] += delta * xi[j];
            b += delta;
        }
        if (max_pg < kPgTol) break;
    }
    return std::make_unique<LinearModel>(std::move(w), b);
}

// Kernelized variant: K'(u,v) = exp(-gamma |u-v|^2) + 1, the +1 folding the
// bias into the kernel so the same box-constrained dual applies.
std::unique_ptr<ModelImpl> train_rbf_svm(const Matrix& x, std::span<const std::uint8_t> y,
                                         std::span<const double> sw, double c,
                                         std::uint64_t seed) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;

    // gamma = 1 / (d * Var(X)), variance pooled over all entries.
    double mean = 0.0;
    for (double v : x.data) mean += v;
    mean /= static_cast<double>(x.data.size());
    double var = 0.0;
    for (double v : x.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.data.size());
    const double gamma = var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;

    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double* a = x.row(i);
            const double* b = x.row(j);
            double dist = 0.0;
            for (std::size_t f = 0; f < d; ++f) dist += (a[f] - b[f]) * (a[f] - b[f]);
            const double k = std::exp(-gamma * dist) + 1.0;
            kmat[i * n + j] = k;
            kmat[j * n + i] = k;
        }
    }

    std::vector<int> y_pm(n);
    std::vector<double> upper(n), alpha(n, 0.0), fcache(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        y_pm[i] = y[i] ? 1 : -1;
        upper[i] = c * sw[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, fnv1a64("svm-rbf-cd")));

    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
        rng.shuffle(order);
        double max_pg = 0.0;
        for (std::size_t i : order) {
            const double g = y_pm[i] * fcache[i] - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0 && g > 0.0) pg = 0.0;
            if (alpha[i] >= upper[i] && g < 0.0) pg = 0.0;
            max_pg = std::max(max_pg, std::abs(pg));
            if (pg == 0.0) continue;

            const double alpha_new = std::clamp(alpha[i] - g / kmat[i * n + i], 0.0, upper[i]);
            const double delta = (alpha_new - alpha[i]) * y_pm[i];
            alpha[i] = alpha_new;
            const double* krow = kmat.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) fcache[j] += delta * krow[j];
        }
        if (max_pg < kPgTol) break;
    }

    // Keep only support vectors.
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) sv.push_back(i);
    }
    Matrix support(sv.size(), d);
    std::vector<double> alpha_y(sv.size());
    for (std::size_t k = 0; k < sv.size(); ++k) {
        const double* src = x.row(sv[k]);
        for (std::size_t f = 0; f < d; ++f) support.at(k, f) = src[f];
        alpha_y[k] = alpha[sv[k]] * y_pm[sv[k]];
    }
    return std::make_unique<RbfSvmModel>(std::move(support), std::move(alpha_y), gamma);
}

std::vector<std::uint8_t> RbfSvmModel::predict(const Matrix& x) const {
    std::vector<std::uint8_t> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double f = 0.0;
        for (std::size_t s = 0; s < support_.rows; ++s) {
            const double* sv = support_.row(s);
            double dist = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j) dist += (xi[j] - sv[j]) * (xi[j] - sv[j]);
            f += alpha_y_[s] * (std::exp(-gamma_ * dist) + 1.0);
        }
        out[i] = f > 0.0 ? 1 : 0;
    }
    return out;
}

nlohmann::ordered_json RbfSvmModel::params_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "rbf_svm";
    j["gamma"] = gamma_;
    j["n_features"] = support_.cols;
    j["support"] = support_.data;
    j["alpha_y"] = alpha_y_;
    return j;
}

std::unique_ptr<ModelImpl> rbf_from_json(const nlohmann::json& j) {
    Matrix support;
    support.cols = j.at("n_features").get<std::size_t>();
    support.data = j.at("support").get<std::vector<double>>();
    support.rows = support.cols ? support.data.size() / support.cols : 0;
    return std::make_unique<RbfSvmModel>(std::move(support),
                                         j.at("alpha_y").get<std::vector<double>>(),
                                         j.at("gamma").get<double>());
}

} // namespace edastress::detail
