#include "edastress/stats.hpp"

#include "edastress/errors.hpp"
#include "normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace edastress {

namespace wilcoxon_detail {

// counts[u] = number of arrangements of n1 + n2 distinct ranks giving
// Mann-Whitney U == u for the first sample. Recurrence: condition on whether
// the largest value belongs to sample 1 (it then beats all n2 others).
std::vector<double> exact_u_counts(std::size_t n1, std::size_t n2) {
    std::vector<std::vector<double>> dp(n2 + 1);
    for (std::size_t n = 0; n <= n2; ++n) dp[n] = {1.0}; // m = 0
    for (std::size_t m = 1; m <= n1; ++m) {
        std::vector<std::vector<double>> next(n2 + 1);
        next[0] = {1.0}; // n = 0: U must be 0
        for (std::size_t n = 1; n <= n2; ++n) {
            std::vector<double> counts(m * n + 1, 0.0);
            for (std::size_t u = 0; u <= m * n; ++u) {
                double c = 0.0;
                if (u >= n) c += dp[n][u - n];            // largest from sample 1
                if (u < next[n - 1].size()) c += next[n - 1][u]; // from sample 2
                counts[u] = c;
            }
            next[n] = std::move(counts);
        }
        dp = std::move(next);
    }
    return dp[n2];
}

} // namespace wilcoxon_detail

double hodges_lehmann(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw_protocol("hodges_lehmann: empty sample");
    std::vector<double> diffs;
    diffs.reserve(x.size() * y.size());
    for (double xi : x) {
        for (double yj : y) diffs.push_back(xi - yj);
    }
    std::sort(diffs.begin(), diffs.end());
    const std::size_t m = diffs.size();
    return m % 2 ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
}

std::string alternative_name(Alternative a) {
    switch (a) {
    case Alternative::two_sided: return "two_sided";
    case Alternative::less: return "less";
    case Alternative::greater: return "greater";
    }
    return "two_sided";
}

namespace {

struct RankInfo {
    double r1 = 0.0;       // rank sum of the first sample (midranks)
    double tie_term = 0.0; // sum of t^3 - t over tie groups
    bool has_ties = false;
};

RankInfo combined_ranks(std::span<const double> x, std::span<const double> y) {
    struct Tagged {
        double v;
        bool first;
    };
    std::vector<Tagged> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.v < b.v; });

    RankInfo info;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double t = static_cast<double>(j - i);
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].first) info.r1 += midrank;
        }
        if (t > 1.0) {
            info.has_ties = true;
            info.tie_term += t * t * t - t;
        }
        i = j;
    }
    return info;
}

// Normal-approximation tails for U with continuity correction.
struct ApproxDist {
    double mu;
    double sigma;

    double p_le(double u) const { return detail::normal_cdf((u + 0.5 - mu) / sigma); }
    double p_ge(double u) const { return detail::normal_sf((u - 0.5 - mu) / sigma); }
};

// Largest integer k in [lo, hi] with pred(k) true, or lo - 1 when none.
template <typename Pred>
long search_last(long lo, long hi, Pred pred) {
    long best = lo - 1;
    while (lo <= hi) {
        const long mid = lo + (hi - lo) / 2;
        if (pred(mid)) {
            best = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return best;
}

} // namespace

HypothesisTestResult wilcoxon_rank_sum(std::span<const double> x,
                                       std::span<const double> y,
                                       Alternative alternative, double alpha,
                                       std::optional<double> ci_level_opt) {
    const std::size_t n1 = x.size();
    const std::size_t n2 = y.size();
    if (n1 == 0 || n2 == 0) throw_protocol("wilcoxon_rank_sum: empty sample");

    const double nn = static_cast<double>(n1) * static_cast<double>(n2);
    const double n = static_cast<double>(n1 + n2);

    const RankInfo ranks = combined_ranks(x, y);
    const double u1 = ranks.r1 - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;

    HypothesisTestResult result;
    result.test_name = "wilcoxon_rank_sum";
    result.alternative = alternative;
    result.statistic = u1;
    result.rank_sum_w = ranks.r1;
    result.alpha = alpha;
    result.ci_level = ci_level_opt.value_or(1.0 - alpha);
    result.n1 = n1;
    result.n2 = n2;
    result.exact = (n1 + n2 <= 20) && !ranks.has_ties;

    const double mu = nn / 2.0;
    const double sigma2 = nn / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    if (sigma2 <= 0.0) {
        throw_protocol("wilcoxon_rank_sum: degenerate samples (all values tied)");
    }
    const double sigma = std::sqrt(sigma2);
    const ApproxDist approx{mu, sigma};

    // Tail probabilities of the observed statistic.
    double p_less, p_greater;
    std::vector<double> counts;
    double total = 0.0;
    if (result.exact) {
        counts = wilcoxon_detail::exact_u_counts(n1, n2);
        for (double c : counts) total += c;
        const auto u_obs = static_cast<std::size_t>(std::llround(u1));
        double below = 0.0, above = 0.0;
        for (std::size_t u = 0; u < counts.size(); ++u) {
            if (u <= u_obs) below += counts[u];
            if (u >= u_obs) above += counts[u];
        }
        p_less = below / total;
        p_greater = above / total;
    } else {
        p_less = approx.p_le(u1);
        p_greater = approx.p_ge(u1);
    }

    double z = 0.0; // effect-size z, continuity-corrected per the alternative
    switch (alternative) {
    case Alternative::less:
        result.p_value = p_less;
        z = (u1 + 0.5 - mu) / sigma;
        break;
    case Alternative::greater:
        result.p_value = p_greater;
        z = (u1 - 0.5 - mu) / sigma;
        break;
    case Alternative::two_sided:
        result.p_value = std::min(1.0, 2.0 * std::min(p_less, p_greater));
        z = u1 == mu ? 0.0 : (u1 - 0.5 * (u1 > mu ? 1.0 : -1.0) - mu) / sigma;
        break;
    }
    result.effect_size = std::abs(z) / std::sqrt(n);
    result.reject_null = result.p_value < alpha;
    result.point_estimate = hodges_lehmann(x, y);

    // Shift CI by inversion of the rank test on the ordered pairwise
    // differences. k* = smallest k with P(U >= k) < a (lower bound side),
    // j* = largest j with P(U <= j) < a (upper bound side).
    const double alpha_ci = 1.0 - result.ci_level;
    const double a_side = alternative == Alternative::two_sided ? alpha_ci / 2.0 : alpha_ci;
    const auto m_total = static_cast<long>(nn);

    const auto tail_ge = [&](long k) -> double {
        if (k <= 0) return 1.0;
        if (k > m_total) return 0.0;
        if (result.exact) {
            double s = 0.0;
            for (std::size_t u = static_cast<std::size_t>(k); u < counts.size(); ++u) s += counts[u];
            return s / total;
        }
        return approx.p_ge(static_cast<double>(k));
    };
    const auto tail_le = [&](long j) -> double {
        if (j < 0) return 0.0;
        if (j >= m_total) return 1.0;
        if (result.exact) {
            double s = 0.0;
            for (long u = 0; u <= j; ++u) s += counts[static_cast<std::size_t>(u)];
            return s / total;
        }
        return approx.p_le(static_cast<double>(j));
    };

    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(m_total));
    for (double xi : x) {
        for (double yj : y) diffs.push_back(xi - yj);
    }
    std::sort(diffs.begin(), diffs.end());
    const auto diff_at = [&](long idx1 /*1-based*/) { return diffs[static_cast<std::size_t>(idx1 - 1)]; };

    const double inf = std::numeric_limits<double>::infinity();
    double lower = -inf, upper = inf;
    if (alternative != Alternative::less) { // lower bound
        // smallest k with P(U >= k) < a == (largest k with P >= a) + 1
        const long k_keep = search_last(0, m_total, [&](long k) { return tail_ge(k) >= a_side; });
        const long k_star = k_keep + 1;
        const long idx = m_total - k_star + 1;
        lower = idx >= 1 && idx <= m_total ? diff_at(idx) : -inf;
    }
    if (alternative != Alternative::greater) { // upper bound
        const long j_star = search_last(0, m_total - 1, [&](long j) { return tail_le(j) < a_side; });
        if (j_star >= 0) {
            const long idx = m_total - j_star;
            upper = idx >= 1 && idx <= m_total ? diff_at(idx) : inf;
        }
    }
    result.ci_low = lower;
    result.ci_high = upper;
    return result;
}

} // namespace edastress
