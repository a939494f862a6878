#include "edastress/stats.hpp"

#include "edastress/errors.hpp"
#include "normal_dist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace edastress {

std::vector<QqPoint> qq_points(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<QqPoint> points;
    points.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // Blom plotting positions.
        const double p = (static_cast<double>(i + 1) - 0.375) / (n + 0.25);
        points.push_back({detail::normal_quantile(p), sorted[i]});
    }
    return points;
}

std::vector<HistogramBin> histogram_bins(std::span<const double> values) {
    if (values.empty()) return {};
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;

    if (mx == mn) {
        return {{mn - 0.5, mn + 0.5, values.size()}};
    }
    const auto n_bins = std::max<std::size_t>(
        5, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(values.size())))));
    const double width = (mx - mn) / static_cast<double>(n_bins);

    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].left = mn + static_cast<double>(b) * width;
        bins[b].right = mn + static_cast<double>(b + 1) * width;
    }
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - mn) / width);
        if (b >= n_bins) b = n_bins - 1; // v == mx lands in the last bin
        ++bins[b].count;
    }
    return bins;
}

namespace {

// Pairs two score tables on (dataset?, subject, family) and returns the
// aligned value vectors in canonical key order.
struct PairedGroups {
    std::vector<double> a;
    std::vector<double> b;
};

PairedGroups pair_scores(const std::vector<BAScore>& group_a,
                         const std::vector<BAScore>& group_b,
                         bool key_includes_dataset) {
    if (group_a.size() != group_b.size()) {
        throw_protocol("hypothesis input audit: group sizes differ (" +
                       std::to_string(group_a.size()) + " vs " +
                       std::to_string(group_b.size()) + ")");
    }
    const auto key = [&](const BAScore& s) {
        std::string k = key_includes_dataset ? s.dataset + "\x1f" : std::string();
        return k + s.subject_id + "\x1f" + family_name(s.family);
    };
    std::map<std::string, double> map_a, map_b;
    for (const BAScore& s : group_a) {
        if (!map_a.emplace(key(s), s.balanced_accuracy).second) {
            throw_protocol("hypothesis input audit: duplicate observation for " + key(s));
        }
    }
    for (const BAScore& s : group_b) {
        if (!map_b.emplace(key(s), s.balanced_accuracy).second) {
            throw_protocol("hypothesis input audit: duplicate observation for " + key(s));
        }
    }
    PairedGroups out;
    for (const auto& [k, va] : map_a) {
        const auto it = map_b.find(k);
        if (it == map_b.end()) {
            throw_protocol("hypothesis input audit: no counterpart for " + k);
        }
        out.a.push_back(va);
        out.b.push_back(it->second);
    }
    return out;
}

std::string decision_text(const HypothesisTestResult& t) {
    std::ostringstream os;
    os << (t.reject_null ? "reject H0" : "fail to reject H0") << " at alpha=" << t.alpha
       << " (p=" << t.p_value << ", " << alternative_name(t.alternative) << ")";
    return os.str();
}

HypothesisReport build_report(int hypothesis, const std::string& name_a,
                              const std::string& name_b,
                              const std::vector<BAScore>& scores_a,
                              const std::vector<BAScore>& scores_b,
                              bool key_includes_dataset, Alternative alternative,
                              double alpha, double ci_level, AdTable ad_table) {
    const PairedGroups paired = pair_scores(scores_a, scores_b, key_includes_dataset);

    // Degenerate (constant) groups leave the normality statistics undefined;
    // report them as non-normal rather than aborting the comparison.
    const auto safe_normality = [&](std::span<const double> v) {
        try {
            return normality_report(v, ad_table);
        } catch (const Error&) {
            return NormalityReport{};
        }
    };

    HypothesisReport report;
    report.hypothesis = hypothesis;
    report.group_a.name = name_a;
    report.group_a.values = paired.a;
    report.group_a.normality = safe_normality(paired.a);
    report.group_a.qq = qq_points(paired.a);
    report.group_b.name = name_b;
    report.group_b.values = paired.b;
    report.group_b.normality = safe_normality(paired.b);
    report.group_b.qq = qq_points(paired.b);

    report.paired_differences.resize(paired.a.size());
    for (std::size_t i = 0; i < paired.a.size(); ++i) {
        report.paired_differences[i] = paired.a[i] - paired.b[i];
    }
    report.diff_histogram = histogram_bins(report.paired_differences);
    report.diff_normality = safe_normality(report.paired_differences);

    report.test = wilcoxon_rank_sum(paired.a, paired.b, alternative, alpha, ci_level);
    report.mirrored_statistic =
        static_cast<double>(paired.a.size()) * static_cast<double>(paired.b.size()) -
        report.test.statistic;
    report.mirrored_hl = -report.test.point_estimate;
    report.mirrored_ci_low = -report.test.ci_high;
    report.mirrored_ci_high = -report.test.ci_low;
    report.decision = decision_text(report.test);
    return report;
}

} // namespace

HypothesisReport run_hypothesis1(const std::vector<BAScore>& ba_user_dependent,
                                 const std::vector<BAScore>& ba_user_independent,
                                 const Hypothesis1Options& options) {
    return build_report(1, "user_dependent", "user_independent", ba_user_dependent,
                        ba_user_independent, /*key_includes_dataset=*/true,
                        Alternative::greater, options.alpha, options.ci_level,
                        options.ad_table);
}

HypothesisReport run_hypothesis2(const std::vector<BAScore>& ba_group_a,
                                 const std::vector<BAScore>& ba_group_b,
                                 const Hypothesis2Options& options) {
    const std::string name_a = ba_group_a.empty() ? "group_a" : ba_group_a.front().dataset;
    const std::string name_b = ba_group_b.empty() ? "group_b" : ba_group_b.front().dataset;
    return build_report(2, name_a, name_b, ba_group_a, ba_group_b,
                        /*key_includes_dataset=*/false, Alternative::two_sided,
                        options.alpha, options.ci_level, options.ad_table);
}

} // namespace edastress
