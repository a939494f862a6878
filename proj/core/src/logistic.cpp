#include "edastress/errors.hpp"
#include "learner_impls.hpp"

#include <cmath>

namespace edastress::detail {

namespace {

// log(1 + exp(-t)) without overflow.
double log1pexp_neg(double t) {
    if (t >= 0.0) return std::log1p(std::exp(-t));
    return -t + std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// In-place Cholesky solve of A x = b for a symmetric positive-definite A.
// Returns false when the factorization breaks down.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (diag <= 0.0) return false;
        const double ljj = std::sqrt(diag);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / ljj;
        }
    }
    for (std::size_t i = 0; i < n; ++i) { // forward
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
        b[i] = v / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) { // backward
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * b[k];
        b[ii] = v / a[ii * n + ii];
    }
    return true;
}

} // namespace

double logistic_loss_grad(std::span<const double> wb, const Matrix& x,
                          std::span<const int> y_pm, std::span<const double> sw,
                          double c, std::span<double> grad_out) {
    const std::size_t d = x.cols;
    const std::size_t n = x.rows;

    double loss = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        loss += 0.5 * wb[j] * wb[j];
        grad_out[j] = wb[j];
    }
    grad_out[d] = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double z = wb[d];
        for (std::size_t j = 0; j < d; ++j) z += wb[j] * xi[j];
        const double yz = y_pm[i] * z;
        loss += c * sw[i] * log1pexp_neg(yz);
        const double coeff = -c * sw[i] * y_pm[i] * sigmoid(-yz);
        for (std::size_t j = 0; j < d; ++j) grad_out[j] += coeff * xi[j];
        grad_out[d] += coeff;
    }
    return loss;
}

std::unique_ptr<ModelImpl> train_logistic(const Matrix& x, std::span<const std::uint8_t> y,
                                          std::span<const double> sw, double c,
                                          const std::string& grid_point) {
    const std::size_t d = x.cols;
    const std::size_t n = x.rows;
    const std::size_t dim = d + 1;

    std::vector<int> y_pm(n);
    for (std::size_t i = 0; i < n; ++i) y_pm[i] = y[i] ? 1 : -1;

    std::vector<double> wb(dim, 0.0), grad(dim), step(dim), hess(dim * dim);
    constexpr double kGradTol = 1e-6;
    constexpr int kMaxIter = 5000;

    double loss = logistic_loss_grad(wb, x, y_pm, sw, c, grad);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        if (!std::isfinite(loss)) {
            throw_protocol("logistic training diverged (non-finite loss) at grid point " + grid_point);
        }
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        if (std::sqrt(gnorm) < kGradTol) break;

        // Newton direction; the intercept is unregularized.
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t j = 0; j < d; ++j) hess[j * dim + j] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = x.row(i);
            double z = wb[d];
            for (std::size_t j = 0; j < d; ++j) z += wb[j] * xi[j];
            const double p = sigmoid(z);
            const double h = c * sw[i] * p * (1.0 - p);
            if (h == 0.0) continue;
            for (std::size_t a = 0; a < d; ++a) {
                const double ha = h * xi[a];
                for (std::size_t b = 0; b <= a; ++b) hess[a * dim + b] += ha * xi[b];
                hess[d * dim + a] += ha;
            }
            hess[d * dim + d] += h;
        }
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = a + 1; b < dim; ++b) hess[a * dim + b] = hess[b * dim + a];
        }

        step.assign(grad.begin(), grad.end());
        std::vector<double> hess_copy = hess;
        double ridge = 0.0;
        while (!cholesky_solve(hess_copy, step, dim)) {
            ridge = ridge == 0.0 ? 1e-8 : ridge * 10.0;
            if (ridge > 1e6) throw_protocol("logistic Hessian not solvable at grid point " + grid_point);
            hess_copy = hess;
            for (std::size_t a = 0; a < dim; ++a) hess_copy[a * dim + a] += ridge;
            step.assign(grad.begin(), grad.end());
        }

        // Backtracking line search on the Newton step.
        double t = 1.0;
        std::vector<double> trial(dim);
        double new_loss = loss;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t a = 0; a < dim; ++a) trial[a] = wb[a] - t * step[a];
            new_loss = logistic_loss_grad(trial, x, y_pm, sw, c, grad);
            if (new_loss <= loss + 1e-12) break;
            t *= 0.5;
        }
        wb = trial;
        loss = new_loss;
    }

    std::vector<double> w(wb.begin(), wb.begin() + static_cast<std::ptrdiff_t>(d));
    return std::make_unique<LinearModel>(std::move(w), wb[d]);
}

std::vector<std::uint8_t> LinearModel::predict(const Matrix& x) const {
    std::vector<std::uint8_t> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double z = b_;
        for (std::size_t j = 0; j < x.cols; ++j) z += w_[j] * xi[j];
        out[i] = z > 0.0 ? 1 : 0;
    }
    return out;
}

nlohmann::ordered_json LinearModel::params_json() const {
    return {{"kind", "linear"}, {"weights", w_}, {"bias", b_}};
}

std::unique_ptr<ModelImpl> linear_from_json(const nlohmann::json& j) {
    return std::make_unique<LinearModel>(j.at("weights").get<std::vector<double>>(),
                                         j.at("bias").get<double>());
}

} // namespace edastress::detail
