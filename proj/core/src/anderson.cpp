#include "edastress/stats.hpp"

#include "edastress/errors.hpp"
#include "normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace edastress {

namespace {

constexpr std::array<double, 5> kSignificance = {15.0, 10.0, 5.0, 2.5, 1.0};

// Estimated-parameters critical values for the corrected statistic.
// `stephens` is the standard published table; `paper` keeps the 0.722 value
// at the 5% level that the reference analysis quotes, with the remaining
// levels scaled proportionally.
constexpr std::array<double, 5> kTableStephens = {0.561, 0.631, 0.752, 0.873, 1.035};
constexpr std::array<double, 5> kTablePaper = {0.539, 0.606, 0.722, 0.838, 0.994};

double safe_log(double v) {
    return std::log(std::max(v, 1e-300));
}

} // namespace

AndersonDarlingResult anderson_darling_normal(std::span<const double> sample, AdTable table) {
    const std::size_t n = sample.size();
    if (n < 8) {
        throw_protocol("anderson_darling: sample size must be >= 8, got " + std::to_string(n));
    }

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    if (var <= 0.0) throw_protocol("anderson_darling: undefined for a constant sample");
    const double sd = std::sqrt(var);

    double a2 = -static_cast<double>(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = (x[i] - mean) / sd;
        const double zrev = (x[n - 1 - i] - mean) / sd;
        a2 -= inv_n * (2.0 * static_cast<double>(i + 1) - 1.0) *
              (safe_log(detail::normal_cdf(zi)) + safe_log(detail::normal_sf(zrev)));
    }

    AndersonDarlingResult result;
    result.a2_uncorrected = a2;
    const double nd = static_cast<double>(n);
    result.a2 = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
    result.significance_levels = kSignificance;
    result.critical_values = table == AdTable::paper ? kTablePaper : kTableStephens;
    return result;
}

NormalityReport normality_report(std::span<const double> sample, AdTable table) {
    const ShapiroResult sw = shapiro_wilk(sample);
    const AndersonDarlingResult ad = anderson_darling_normal(sample, table);

    NormalityReport report;
    report.shapiro_w = sw.w;
    report.shapiro_p = sw.p_value;
    report.ad_statistic = ad.a2;
    report.ad_critical_005 = ad.critical_values[2];
    report.normal_at_005 = sw.p_value >= 0.05 && ad.a2 <= ad.critical_values[2];
    return report;
}

} // namespace edastress
