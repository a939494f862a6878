#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "learner_impls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edastress::detail {

namespace {

constexpr int kEpochs = 300;
constexpr std::size_t kBatchSize = 32;
constexpr double kStepSize = 1e-3;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct ParamView {
    // Layout of the flat parameter vector: [W1 (h x d), b1, w2, b2].
    double* w1;
    double* b1;
    double* w2;
    double* b2;
};

ParamView view(double* p, std::size_t d, int hidden) {
    const auto h = static_cast<std::size_t>(hidden);
    return {p, p + h * d, p + h * d + h, p + h * d + 2 * h};
}

} // namespace

std::size_t mlp_param_count(std::size_t d, int hidden) {
    const auto h = static_cast<std::size_t>(hidden);
    return h * d + h + h + 1;
}

double mlp_loss_grad(std::span<const double> params, int hidden,
                     const Matrix& x, std::span<const std::uint8_t> y,
                     std::span<const double> sw, std::span<double> grad_out) {
    const std::size_t d = x.cols;
    const std::size_t n = x.rows;
    const auto h = static_cast<std::size_t>(hidden);

    const ParamView p = view(const_cast<double*>(params.data()), d, hidden);
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    ParamView g = view(grad_out.data(), d, hidden);

    std::vector<double> act(h);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        for (std::size_t j = 0; j < h; ++j) {
            const double* w_row = p.w1 + j * d;
            double a = p.b1[j];
            for (std::size_t k = 0; k < d; ++k) a += w_row[k] * xi[k];
            act[j] = a > 0.0 ? a : 0.0;
        }
        double z = *p.b2;
        for (std::size_t j = 0; j < h; ++j) z += p.w2[j] * act[j];

        // Stable weighted cross-entropy: max(z,0) - z*y + log(1+exp(-|z|)).
        const double yi = y[i] ? 1.0 : 0.0;
        loss += sw[i] * (std::max(z, 0.0) - z * yi + std::log1p(std::exp(-std::abs(z)))) * inv_n;

        const double prob = 1.0 / (1.0 + std::exp(-z));
        const double dz = sw[i] * (prob - yi) * inv_n;
        *g.b2 += dz;
        for (std::size_t j = 0; j < h; ++j) {
            g.w2[j] += dz * act[j];
            if (act[j] > 0.0) {
                const double da = dz * p.w2[j];
                g.b1[j] += da;
                double* gw_row = g.w1 + j * d;
                for (std::size_t k = 0; k < d; ++k) gw_row[k] += da * xi[k];
            }
        }
    }
    return loss;
}

std::unique_ptr<ModelImpl> train_mlp(const Matrix& x, std::span<const std::uint8_t> y,
                                     std::span<const double> sw, int hidden,
                                     std::uint64_t seed, const std::string& grid_point) {
    const std::size_t d = x.cols;
    const std::size_t n = x.rows;
    const auto h = static_cast<std::size_t>(hidden);
    const std::size_t n_params = mlp_param_count(d, hidden);

    // Scaled-uniform (Glorot) init, biases zero.
    std::vector<double> params(n_params, 0.0);
    {
        Rng rng(derive_seed(seed, fnv1a64("mlp-init")));
        ParamView p = view(params.data(), d, hidden);
        const double lim1 = std::sqrt(6.0 / static_cast<double>(d + h));
        for (std::size_t i = 0; i < h * d; ++i) p.w1[i] = rng.uniform(-lim1, lim1);
        const double lim2 = std::sqrt(6.0 / static_cast<double>(h + 1));
        for (std::size_t j = 0; j < h; ++j) p.w2[j] = rng.uniform(-lim2, lim2);
    }

    // Adam at the fixed 1e-3 step size over a 300-epoch budget.
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0), grad(n_params);
    Rng shuffle_rng(derive_seed(seed, fnv1a64("mlp-shuffle")));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Matrix batch_x;
    std::vector<std::uint8_t> batch_y;
    std::vector<double> batch_sw;
    long step = 0;

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += kBatchSize) {
            const std::size_t len = std::min(kBatchSize, n - start);
            batch_x.rows = len;
            batch_x.cols = d;
            batch_x.data.resize(len * d);
            batch_y.resize(len);
            batch_sw.resize(len);
            for (std::size_t b = 0; b < len; ++b) {
                const std::size_t src = order[start + b];
                std::copy_n(x.row(src), d, batch_x.row(b));
                batch_y[b] = y[src];
                batch_sw[b] = sw[src];
            }

            const double loss = mlp_loss_grad(params, hidden, batch_x, batch_y, batch_sw, grad);
            if (!std::isfinite(loss)) {
                throw_protocol("mlp training diverged (non-finite loss) at grid point " + grid_point);
            }

            ++step;
            const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
            for (std::size_t i = 0; i < n_params; ++i) {
                m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
                v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
                params[i] -= kStepSize * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
            }
        }
    }
    return std::make_unique<MlpModel>(std::move(params), hidden, d);
}

std::vector<std::uint8_t> MlpModel::predict(const Matrix& x) const {
    const auto h = static_cast<std::size_t>(hidden_);
    const ParamView p = view(const_cast<double*>(params_.data()), d_, hidden_);
    std::vector<std::uint8_t> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double z = *p.b2;
        for (std::size_t j = 0; j < h; ++j) {
            const double* w_row = p.w1 + j * d_;
            double a = p.b1[j];
            for (std::size_t k = 0; k < d_; ++k) a += w_row[k] * xi[k];
            if (a > 0.0) z += p.w2[j] * a;
        }
        out[i] = z > 0.0 ? 1 : 0;
    }
    return out;
}

nlohmann::ordered_json MlpModel::params_json() const {
    return {{"kind", "mlp"}, {"hidden", hidden_}, {"n_features", d_}, {"params", params_}};
}

std::unique_ptr<ModelImpl> mlp_from_json(const nlohmann::json& j) {
    return std::make_unique<MlpModel>(j.at("params").get<std::vector<double>>(),
                                      j.at("hidden").get<int>(),
                                      j.at("n_features").get<std::size_t>());
}

} // namespace edastress::detail
