#include "edastress/stats.hpp"

#include "edastress/errors.hpp"
#include "normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace edastress {

namespace {

// Royston's 1995 approximation of the W order-statistic weights and the
// normalizing transformation of W (Applied Statistics algorithm R94). The
// polynomial coefficient sets below are embedded verbatim from the
// published algorithm; the 3 <= n < 12 branch uses its exact small-n
// transformation constants.
constexpr double kC1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr double kC2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[3] = {-0.4803, -0.082676, 0.0030302};
constexpr double kG[2] = {-2.273, 0.459};
constexpr double kPi6 = 1.90985931710274;  // 6/pi
constexpr double kStqr = 1.04719755119660; // asin(sqrt(3/4))

double poly(const double* c, int nord, double x) {
    double v = c[0];
    double xp = 1.0;
    for (int i = 1; i < nord; ++i) {
        xp *= x;
        v += c[i] * xp;
    }
    return v;
}

} // namespace

ShapiroResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) {
        throw_protocol("shapiro_wilk: sample size must be in [3, 5000], got " +
                       std::to_string(n));
    }

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (range <= 0.0) throw_protocol("shapiro_wilk: W undefined for a constant sample");

    const auto nn2 = n / 2;
    std::vector<double> a(nn2);
    const double an = static_cast<double>(n);

    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        // Lower-half normal scores m_i (negative), then Royston's corrected
        // extreme weights and the shared normalization factor.
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 0; i < nn2; ++i) {
            a[i] = detail::normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(kC1, 6, rsn) - a[0] / ssumm2;

        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 2;
            const double a2 = -a[1] / ssumm2 + poly(kC2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            i1 = 1;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (std::size_t i = i1; i < nn2; ++i) a[i] = -a[i] / fac;
    }

    // W as the squared correlation between the data and the antisymmetric
    // weight vector (scaled by the range for numerical safety).
    const auto weight_at = [&](std::size_t i /*0-based*/) -> double {
        const std::size_t j = n - 1 - i;
        if (i == j) return 0.0;
        const std::size_t k = std::min(i, j);
        return i < j ? -a[k] : a[k];
    };

    double sa = 0.0, sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += weight_at(i);
        sx += x[i] / range;
    }
    sa /= an;
    sx /= an;

    double ssa = 0.0, ssx = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = weight_at(i) - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += asa * xsx;
        sxx += xsx * xsx;
    }
    const double w1 = (ssa * sxx - ssx * ssx) / (ssa * sxx);
    const double w = 1.0 - w1;

    ShapiroResult result;
    result.w = w;

    if (n == 3) {
        double pw = kPi6 * (std::asin(std::sqrt(w)) - kStqr);
        result.p_value = std::clamp(pw, 0.0, 1.0);
        return result;
    }

    double m, s, y;
    if (n <= 11) {
        const double gamma = poly(kG, 2, an);
        y = -std::log(gamma - std::log1p(-w));
        m = poly(kC3, 4, an);
        s = std::exp(poly(kC4, 4, an));
    } else {
        const double log_n = std::log(an);
        y = std::log1p(-w);
        m = poly(kC5, 4, log_n);
        s = std::exp(poly(kC6, 3, log_n));
    }
    result.p_value = detail::normal_sf((y - m) / s);
    return result;
}

} // namespace edastress
