#include "edastress/protocol.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "edastress/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

using namespace edastress;

namespace {

// Brute-force confusion-matrix oracle: independent counting, the canonical
// two-branch arithmetic, plus a long-double rational cross-check.
double ba_oracle(const std::vector<std::uint8_t>& t, const std::vector<std::uint8_t>& p) {
    double tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == 1 && p[i] == 1) ++tp;
        if (t[i] == 1 && p[i] == 0) ++fn;
        if (t[i] == 0 && p[i] == 0) ++tn;
        if (t[i] == 0 && p[i] == 1) ++fp;
    }
    const double value = tp + fn == tn + fp
        ? (tp + tn) / static_cast<double>(t.size())
        : 0.5 * (tp / (tp + fn) + tn / (tn + fp));
    const long double exact = (static_cast<long double>(tp) * (tn + fp) +
                               static_cast<long double>(tn) * (tp + fn)) /
                              (2.0L * (tp + fn) * (tn + fp));
    REQUIRE(std::abs(static_cast<long double>(value) - exact) < 1e-15L);
    return value;
}

std::vector<WindowFeatures> synthetic_features(const SyntheticConfig& cfg) {
    std::vector<WindowFeatures> rows;
    for (const auto& rec : generate_synthetic(cfg)) {
        const auto res = extract_features(rec);
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    }
    return rows;
}

} // namespace

TEST_CASE("balanced accuracy: worked examples") {
    CHECK(balanced_accuracy(std::vector<std::uint8_t>{1, 0, 1, 0},
                            std::vector<std::uint8_t>{1, 0, 1, 0}) == doctest::Approx(1.0));
    CHECK(balanced_accuracy(std::vector<std::uint8_t>{1, 1, 0, 0},
                            std::vector<std::uint8_t>{1, 0, 0, 0}) == doctest::Approx(0.75));

    // All-majority predictor on 90/10 data scores exactly 0.5.
    std::vector<std::uint8_t> t(100, 0), p(100, 0);
    for (std::size_t i = 0; i < 10; ++i) t[i] = 1;
    CHECK(balanced_accuracy(t, p) == doctest::Approx(0.5));

    std::vector<std::uint8_t> single(5, 1);
    CHECK_THROWS_AS(balanced_accuracy(single, single), Error);
    CHECK_THROWS_AS(balanced_accuracy(std::vector<std::uint8_t>{0, 1},
                                      std::vector<std::uint8_t>{0}), Error);
}

TEST_CASE("balanced accuracy equals the brute-force oracle on random vectors") {
    Rng rng(1);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 2 + rng.index(60);
        std::vector<std::uint8_t> t(n), p(n);
        for (auto& v : t) v = static_cast<std::uint8_t>(rng.index(2));
        for (auto& v : p) v = static_cast<std::uint8_t>(rng.index(2));
        const bool both = std::count(t.begin(), t.end(), 1) > 0 &&
                          std::count(t.begin(), t.end(), 0) > 0;
        if (!both) continue;
        CHECK(balanced_accuracy(t, p) == ba_oracle(t, p)); // exact
    }
}

TEST_CASE("balanced accuracy properties: label swap and balanced identity") {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t half = 1 + rng.index(20);
        std::vector<std::uint8_t> t, p;
        for (std::size_t i = 0; i < 2 * half; ++i) {
            t.push_back(i < half ? 0 : 1);
            p.push_back(static_cast<std::uint8_t>(rng.index(2)));
        }
        // Exactly balanced: BA equals plain accuracy, exactly.
        double acc = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] == p[i] ? 1.0 : 0.0;
        acc /= static_cast<double>(t.size());
        CHECK(balanced_accuracy(t, p) == acc);

        // Swapping labels in both vectors leaves BA unchanged.
        std::vector<std::uint8_t> ts(t), ps(p);
        for (auto& v : ts) v = static_cast<std::uint8_t>(1 - v);
        for (auto& v : ps) v = static_cast<std::uint8_t>(1 - v);
        CHECK(balanced_accuracy(ts, ps) == doctest::Approx(balanced_accuracy(t, p)));
    }
}

TEST_CASE("stratified split: worked examples") {
    std::vector<std::uint8_t> y(100, 0);
    for (std::size_t i = 70; i < 100; ++i) y[i] = 1;
    const auto plan = stratified_split(y, 0.286, 4);
    CHECK(plan.test_indices.size() == 29); // 20 + 9
    std::size_t test_ones = 0;
    for (std::size_t i : plan.test_indices) test_ones += y[i];
    CHECK(test_ones == 9);

    std::vector<std::uint8_t> small(14, 0);
    for (std::size_t i = 7; i < 14; ++i) small[i] = 1;
    const auto plan2 = stratified_split(small, 0.286, 4);
    CHECK(plan2.test_indices.size() == 4); // 2 + 2

    // Determinism.
    const auto plan3 = stratified_split(y, 0.286, 4);
    CHECK(plan3.test_indices == plan.test_indices);
    CHECK(plan3.train_indices == plan.train_indices);

    std::vector<std::uint8_t> infeasible = {0, 0, 0, 1};
    CHECK_THROWS_AS(stratified_split(infeasible, 0.286, 4), Error);
}

TEST_CASE("stratified split: partition and ratio properties") {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 10 + rng.index(200);
        std::vector<std::uint8_t> y(n);
        for (auto& v : y) v = static_cast<std::uint8_t>(rng.index(2));
        const auto n1 = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        if (n1 < 2 || n - n1 < 2) continue;
        const auto plan = stratified_split(y, 0.286, rng.next_u64());

        std::set<std::size_t> seen;
        for (std::size_t i : plan.train_indices) seen.insert(i);
        for (std::size_t i : plan.test_indices) seen.insert(i);
        CHECK(seen.size() == n);
        CHECK(plan.train_indices.size() + plan.test_indices.size() == n);

        // Class ratio in test within 1/n_c of the full ratio.
        for (int cls : {0, 1}) {
            const double n_c = cls ? static_cast<double>(n1) : static_cast<double>(n - n1);
            double in_test = 0;
            for (std::size_t i : plan.test_indices) {
                if (y[i] == cls) ++in_test;
            }
            const double frac = in_test / static_cast<double>(plan.test_indices.size());
            const double full = n_c / static_cast<double>(n);
            CHECK(std::abs(frac - full) <= 1.0 / n_c + 1e-12);
        }
    }
}

TEST_CASE("logo splits: one plan per subject, exact partition") {
    std::vector<std::string> subjects;
    for (const char* s : {"a", "a", "b", "b", "b", "c"}) subjects.push_back(s);
    const auto plans = logo_splits(subjects);
    REQUIRE(plans.size() == 3);
    for (const auto& plan : plans) {
        CHECK(plan.train_indices.size() + plan.test_indices.size() == subjects.size());
        for (std::size_t i : plan.test_indices) CHECK(subjects[i] == plan.held_out_subject);
        for (std::size_t i : plan.train_indices) CHECK(subjects[i] != plan.held_out_subject);
    }

    std::vector<std::string> lone(4, "only");
    CHECK_THROWS_AS(logo_splits(lone), Error);
}

TEST_CASE("user-dependent run: score table shape and skip log") {
    SyntheticConfig cfg;
    cfg.n_subjects = 3;
    cfg.sampling_rate_hz = 4.0;
    cfg.segment_plan = SyntheticConfig::default_plan(8, 90.0);
    cfg.rng_seed = 42;
    auto rows = synthetic_features(cfg);

    // Degenerate subject: all windows one class.
    WindowFeatures degenerate;
    degenerate.subject_id = "zz_degenerate";
    degenerate.label = 1;
    for (int i = 0; i < 8; ++i) {
        degenerate.t_start_s = 30.0 * i;
        rows.push_back(degenerate);
    }

    EvalOptions opts;
    opts.threads = 2;
    const auto res = run_user_dependent(rows, "demo", {Family::lr, Family::knn}, 7, opts);

    CHECK(res.scores.size() == 6); // 3 valid subjects x 2 families
    for (const auto& s : res.scores) {
        CHECK(s.protocol == Protocol::user_dependent);
        CHECK(s.dataset == "demo");
        CHECK(s.balanced_accuracy >= 0.0);
        CHECK(s.balanced_accuracy <= 1.0);
        CHECK(s.subject_id != "zz_degenerate");
    }
    // Skipped subject appears in the log with a reason.
    REQUIRE(res.skips.size() == 2);
    CHECK(res.skips[0].subject_id == "zz_degenerate");
    CHECK_FALSE(res.skips[0].reason.empty());

    // Canonical ordering: subjects ascending, families in declaration order.
    for (std::size_t i = 1; i < res.scores.size(); ++i) {
        CHECK(res.scores[i - 1].subject_id <= res.scores[i].subject_id);
    }

    // Reproducibility including under threading.
    EvalOptions serial;
    serial.threads = 1;
    const auto res2 = run_user_dependent(rows, "demo", {Family::lr, Family::knn}, 7, serial);
    REQUIRE(res2.scores.size() == res.scores.size());
    for (std::size_t i = 0; i < res.scores.size(); ++i) {
        CHECK(res.scores[i].balanced_accuracy ==
              doctest::Approx(res2.scores[i].balanced_accuracy));
    }
}

TEST_CASE("user-independent run: LOGO attribution and homogeneity control") {
    // Two statistically identical subjects: UI should roughly match UD.
    SyntheticConfig cfg;
    cfg.n_subjects = 2;
    cfg.sampling_rate_hz = 4.0;
    cfg.segment_plan = SyntheticConfig::default_plan(10, 120.0);
    cfg.baseline_scl_us = {5.0, 5.0}; // identical baselines
    cfg.scr_rate_stress_per_min = 12.0;
    cfg.scr_rate_nonstress_per_min = 1.0;
    cfg.amp_stress_us = {0.5, 1.0};
    cfg.amp_nonstress_us = {0.1, 0.2};
    cfg.rng_seed = 11;
    const auto rows = synthetic_features(cfg);

    EvalOptions opts;
    opts.threads = 2;
    const auto ui = run_user_independent(rows, "homog", {Family::svm}, 5, opts);
    const auto ud = run_user_dependent(rows, "homog", {Family::svm}, 5, opts);
    REQUIRE(ui.scores.size() == 2);
    REQUIRE(ud.scores.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(ui.scores[i].protocol == Protocol::user_independent);
        CHECK(std::abs(ui.scores[i].balanced_accuracy - ud.scores[i].balanced_accuracy) <=
              0.05 + 1e-12);
    }

    // A held-out subject with a single class is excluded and logged.
    auto rows2 = rows;
    WindowFeatures pure;
    pure.subject_id = "zz_pure";
    pure.label = 1;
    for (int i = 0; i < 10; ++i) {
        pure.t_start_s = 30.0 * i;
        pure.values[0] = static_cast<double>(i);
        rows2.push_back(pure);
    }
    const auto ui2 = run_user_independent(rows2, "homog", {Family::lr}, 5, opts);
    bool skipped = false;
    for (const auto& sk : ui2.skips) skipped = skipped || sk.subject_id == "zz_pure";
    CHECK(skipped);
    for (const auto& s : ui2.scores) CHECK(s.subject_id != "zz_pure");
}

TEST_CASE("score table round trip") {
    namespace fs = std::filesystem;
    std::vector<BAScore> scores;
    Rng rng(6);
    for (int i = 0; i < 12; ++i) {
        BAScore s;
        s.dataset = "d" + std::to_string(i % 2);
        s.subject_id = "s" + std::to_string(i % 3);
        s.family = all_families()[static_cast<std::size_t>(i) % 5];
        s.protocol = i % 2 ? Protocol::user_dependent : Protocol::user_independent;
        s.balanced_accuracy = 0.5 + 0.5 * rng.uniform01();
        scores.push_back(s);
    }
    const fs::path path = fs::temp_directory_path() / "edastress_scores_test.csv";
    write_scores_csv(path, scores);
    const auto back = load_scores_csv(path);
    REQUIRE(back.size() == scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(back[i].dataset == scores[i].dataset);
        CHECK(back[i].subject_id == scores[i].subject_id);
        CHECK(back[i].family == scores[i].family);
        CHECK(back[i].protocol == scores[i].protocol);
        CHECK(back[i].balanced_accuracy ==
              doctest::Approx(scores[i].balanced_accuracy).epsilon(1e-11));
    }
    fs::remove(path);
}
