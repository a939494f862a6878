#include "edastress/learners.hpp"

#include "learner_impls.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"
#include "edastress/protocol.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

using namespace edastress;

namespace {

struct Blobs {
    Matrix x;
    std::vector<std::uint8_t> y;
};

// Two Gaussian blobs separated by 6 sigma along the first axis.
Blobs make_blobs(std::size_t per_class, std::uint64_t seed, double separation = 6.0,
                 std::size_t dims = 2) {
    Blobs b;
    b.x = Matrix(2 * per_class, dims);
    Rng rng(seed);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool stress = i >= per_class;
        b.y.push_back(stress ? 1 : 0);
        const double center = stress ? separation / 2.0 : -separation / 2.0;
        b.x.at(i, 0) = center + rng.normal();
        for (std::size_t j = 1; j < dims; ++j) b.x.at(i, j) = rng.normal();
    }
    return b;
}

double train_ba(const TrainedModel& m, const Blobs& b) {
    return balanced_accuracy(b.y, predict(m, b.x));
}

ModelSpec spec_for(Family f) {
    ModelSpec s;
    s.family = f;
    if (f == Family::rf) s.n_estimators = 500;
    return s;
}

} // namespace

TEST_CASE("class weights: worked examples") {
    std::vector<std::uint8_t> balanced(40);
    for (std::size_t i = 20; i < 40; ++i) balanced[i] = 1;
    auto w = compute_class_weights(balanced, WeightMode::balance);
    CHECK(w.w0 == doctest::Approx(1.0));
    CHECK(w.w1 == doctest::Approx(1.0));

    std::vector<std::uint8_t> skewed(40, 0);
    for (std::size_t i = 0; i < 10; ++i) skewed[i] = 1;
    w = compute_class_weights(skewed, WeightMode::balance);
    CHECK(w.w1 == doctest::Approx(2.0));        // stress: 40 / (2 * 10)
    CHECK(w.w0 == doctest::Approx(2.0 / 3.0));  // non-stress: 40 / (2 * 30)

    w = compute_class_weights(skewed, WeightMode::none);
    CHECK(w.w0 == doctest::Approx(1.0));
    CHECK(w.w1 == doctest::Approx(1.0));

    std::vector<std::uint8_t> single(10, 1);
    CHECK_THROWS_AS(compute_class_weights(single, WeightMode::balance), Error);
}

TEST_CASE("standardizer: zero mean, unit variance, constant columns preserved") {
    Rng rng(5);
    Matrix x(60, 4);
    for (std::size_t i = 0; i < x.rows; ++i) {
        x.at(i, 0) = rng.normal(3.0, 2.0);
        x.at(i, 1) = rng.uniform(-4.0, 10.0);
        x.at(i, 2) = 7.77; // constant
        x.at(i, 3) = rng.normal(-10.0, 0.1);
    }
    const auto s = Standardizer::fit(x);
    const auto t = s.transform(x);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < t.rows; ++i) mean += t.at(i, j);
        mean /= static_cast<double>(t.rows);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        if (j == 2) continue;
        double var = 0.0;
        for (std::size_t i = 0; i < t.rows; ++i) var += t.at(i, j) * t.at(i, j);
        var /= static_cast<double>(t.rows);
        CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Constant column: centered only.
    for (std::size_t i = 0; i < t.rows; ++i) CHECK(t.at(i, 2) == doctest::Approx(0.0));
}

TEST_CASE("grid sizes match the configuration table") {
    CHECK(grid_specs(Family::lr).size() == 16);
    CHECK(grid_specs(Family::rf).size() == 16);
    CHECK(grid_specs(Family::svm).size() == 16);
    CHECK(grid_specs(Family::mlp).size() == 4);
    CHECK(grid_specs(Family::knn).size() == 6);

    // LR grid: C varies slowest, declared order preserved.
    const auto lr = grid_specs(Family::lr);
    CHECK(lr[0].C == doctest::Approx(0.001));
    CHECK(lr[0].class_weight == WeightMode::none);
    CHECK(lr[1].C == doctest::Approx(0.001));
    CHECK(lr[1].class_weight == WeightMode::balance);
    CHECK(lr[15].C == doctest::Approx(10.0));

    const auto mlp = grid_specs(Family::mlp);
    CHECK(mlp[0].hidden_units == 64);
    CHECK(mlp[3].hidden_units == 512);
}

TEST_CASE("every family separates 6-sigma blobs on the training set") {
    const Blobs b = make_blobs(40, 1001);
    for (Family f : all_families()) {
        CAPTURE(family_name(f));
        const auto m = train(spec_for(f), b.x, b.y, 7);
        CHECK(train_ba(m, b) == doctest::Approx(1.0));
        CHECK(bool(m.standardizer) == family_standardizes(f));
    }
}

TEST_CASE("training determinism: identical inputs give identical predictions") {
    const Blobs b = make_blobs(25, 2002, 2.0); // overlapping, nontrivial
    const Blobs probe = make_blobs(25, 999, 2.0);
    for (Family f : all_families()) {
        CAPTURE(family_name(f));
        ModelSpec s = spec_for(f);
        if (f == Family::rf) s.n_estimators = 50;
        const auto m1 = train(s, b.x, b.y, 42);
        const auto m2 = train(s, b.x, b.y, 42);
        CHECK(predict(m1, probe.x) == predict(m2, probe.x));
    }
}

TEST_CASE("knn with k=3 predicts its own training points (distance weighted)") {
    Matrix x(3, 2);
    x.at(0, 0) = 0.0; x.at(0, 1) = 0.0;
    x.at(1, 0) = 1.0; x.at(1, 1) = 0.0;
    x.at(2, 0) = 0.0; x.at(2, 1) = 1.0;
    const std::vector<std::uint8_t> y = {0, 1, 0};
    ModelSpec s;
    s.family = Family::knn;
    s.n_neighbors = 3;
    s.knn_weights = KnnWeighting::distance;
    const auto m = train(s, x, y, 1);
    CHECK(predict(m, x) == y);
}

TEST_CASE("logistic regularization is monotone in C") {
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Blobs b = make_blobs(30, 3000 + seed, 1.5, 3); // noisy overlap
        ModelSpec weak = spec_for(Family::lr);
        weak.C = 0.001;
        ModelSpec strong = weak;
        strong.C = 10.0;
        const auto mw = train(weak, b.x, b.y, 5);
        const auto ms = train(strong, b.x, b.y, 5);
        const auto* lw = dynamic_cast<const detail::LinearModel*>(mw.impl.get());
        const auto* lsdyn = dynamic_cast<const detail::LinearModel*>(ms.impl.get());
        REQUIRE(lw != nullptr);
        REQUIRE(lsdyn != nullptr);
        double nw = 0.0, ns = 0.0;
        for (double v : lw->weights()) nw += v * v;
        for (double v : lsdyn->weights()) ns += v * v;
        if (nw <= ns) ++holds;
    }
    CHECK(holds == 10);
}

TEST_CASE("rf refuses nothing it should accept: training BA 1.0 on separable data") {
    const Blobs b = make_blobs(20, 4004);
    ModelSpec s = spec_for(Family::rf);
    s.n_estimators = 500;
    s.min_samples_leaf = 1;
    const auto m = train(s, b.x, b.y, 11);
    CHECK(train_ba(m, b) == doctest::Approx(1.0));
}

TEST_CASE("predict contract: empty input, dimension mismatch") {
    const Blobs b = make_blobs(10, 5005);
    const auto m = train(spec_for(Family::lr), b.x, b.y, 3);
    CHECK(predict(m, Matrix(0, 2)).empty());
    CHECK_THROWS_AS(predict(m, Matrix(4, 3)), Error);
}

TEST_CASE("consistent column permutation leaves knn predictions unchanged") {
    const Blobs b = make_blobs(20, 6006, 2.5, 4);
    ModelSpec s = spec_for(Family::knn);
    const auto m = train(s, b.x, b.y, 9);
    const Blobs probe = make_blobs(10, 777, 2.5, 4);
    const auto before = predict(m, probe.x);

    const std::size_t perm[4] = {2, 0, 3, 1};
    Matrix xp(b.x.rows, 4), pp(probe.x.rows, 4);
    for (std::size_t i = 0; i < b.x.rows; ++i) {
        for (std::size_t j = 0; j < 4; ++j) xp.at(i, perm[j]) = b.x.at(i, j);
    }
    for (std::size_t i = 0; i < probe.x.rows; ++i) {
        for (std::size_t j = 0; j < 4; ++j) pp.at(i, perm[j]) = probe.x.at(i, j);
    }
    const auto mp = train(s, xp, b.y, 9);
    CHECK(predict(mp, pp) == before);
}

TEST_CASE("training preconditions") {
    Matrix x(4, 2);
    std::vector<std::uint8_t> one_class = {1, 1, 1, 1};
    CHECK_THROWS_AS(train(spec_for(Family::lr), x, one_class, 1), Error);

    Matrix bad(2, 2);
    bad.at(0, 0) = std::nan("");
    std::vector<std::uint8_t> y = {0, 1};
    CHECK_THROWS_AS(train(spec_for(Family::lr), bad, y, 1), Error);
}

TEST_CASE("grid search: single-point grid selects that point") {
    const Blobs b = make_blobs(12, 7007);
    ModelSpec only = spec_for(Family::lr);
    only.C = 0.25;
    only.class_weight = WeightMode::balance;
    const std::vector<ModelSpec> grid = {only};
    const auto m = grid_search(grid, b.x, b.y, 13);
    CHECK(m.meta.grid_index == 0);
    CHECK(m.spec.C == doctest::Approx(0.25));
    CHECK(m.spec.class_weight == WeightMode::balance);
    CHECK(m.meta.cv_folds_used == 5);
}

TEST_CASE("grid search: 3-fold fallback is recorded for small classes") {
    const Blobs b = make_blobs(4, 8008); // 4 per class < 5
    const auto m = grid_search(Family::knn, b.x, b.y, 17);
    CHECK(m.meta.cv_folds_used == 3);

    const Blobs tiny = make_blobs(2, 8009);
    CHECK_THROWS_AS(grid_search(Family::knn, tiny.x, tiny.y, 17), Error);
}

TEST_CASE("grid search over the full table is deterministic") {
    const Blobs b = make_blobs(12, 9009, 2.0);
    for (Family f : {Family::lr, Family::knn, Family::mlp}) {
        CAPTURE(family_name(f));
        const auto m1 = grid_search(f, b.x, b.y, 23);
        const auto m2 = grid_search(f, b.x, b.y, 23);
        CHECK(m1.meta.grid_index == m2.meta.grid_index);
        CHECK(m1.meta.inner_cv_ba == doctest::Approx(m2.meta.inner_cv_ba));
        CHECK(m1.meta.grid_index >= 0);
        CHECK(m1.meta.grid_index < static_cast<int>(grid_specs(f).size()));
    }
}

TEST_CASE("stratified folds keep both classes in every fold") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::uint8_t> y(10 + rng.index(40));
        for (auto& v : y) v = rng.index(3) == 0 ? 1 : 0;
        std::size_t n1 = 0;
        for (auto v : y) n1 += v;
        const std::size_t n_min = std::min(n1, y.size() - n1);
        if (n_min < 3) continue;
        const int k = n_min >= 5 ? 5 : 3;
        const auto folds = stratified_folds(y, k, rng.next_u64());
        std::vector<bool> seen(y.size(), false);
        for (const auto& fold : folds) {
            std::size_t ones = 0;
            for (std::size_t i : fold) {
                CHECK_FALSE(seen[i]);
                seen[i] = true;
                ones += y[i];
            }
            CHECK(ones > 0);
            CHECK(ones < fold.size());
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
    }
}

TEST_CASE("model save/load round trip preserves predictions") {
    namespace fs = std::filesystem;
    const Blobs b = make_blobs(15, 1111, 2.0);
    const Blobs probe = make_blobs(12, 2222, 2.0);
    for (Family f : all_families()) {
        CAPTURE(family_name(f));
        ModelSpec s = spec_for(f);
        if (f == Family::rf) s.n_estimators = 20;
        const auto m = train(s, b.x, b.y, 77);
        const fs::path path = fs::temp_directory_path() /
                              ("edastress_model_" + family_name(f) + ".json");
        save_model(path, m);
        const auto loaded = load_model(path);
        CHECK(loaded.spec.family == f);
        CHECK(predict(loaded, probe.x) == predict(m, probe.x));
        fs::remove(path);
    }
}

TEST_CASE("rbf kernel option trains and separates") {
    const Blobs b = make_blobs(25, 3333);
    ModelSpec s = spec_for(Family::svm);
    TrainOptions opt;
    opt.svm_rbf_kernel = true;
    const auto m = train(s, b.x, b.y, 5, opt);
    CHECK(train_ba(m, b) == doctest::Approx(1.0));
}

TEST_CASE("class weighting does not hurt minority recall on imbalanced data") {
    // Median comparison over 20 seeds: recall of the minority class under
    // balance mode must not fall more than fold noise below none mode.
    std::vector<double> deltas;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(10000 + seed);
        const std::size_t n_min = 8, n_maj = 40;
        Matrix x(n_min + n_maj, 2);
        std::vector<std::uint8_t> y;
        for (std::size_t i = 0; i < n_maj; ++i) {
            x.at(i, 0) = -1.0 + rng.normal();
            x.at(i, 1) = rng.normal();
            y.push_back(0);
        }
        for (std::size_t i = n_maj; i < n_maj + n_min; ++i) {
            x.at(i, 0) = 1.0 + rng.normal();
            x.at(i, 1) = rng.normal();
            y.push_back(1);
        }
        ModelSpec none = spec_for(Family::lr);
        none.C = 1.0;
        ModelSpec bal = none;
        bal.class_weight = WeightMode::balance;
        const auto mn = train(none, x, y, seed);
        const auto mb = train(bal, x, y, seed);
        const auto pn = predict(mn, x);
        const auto pb = predict(mb, x);
        double rn = 0.0, rb = 0.0;
        for (std::size_t i = n_maj; i < y.size(); ++i) {
            rn += pn[i];
            rb += pb[i];
        }
        deltas.push_back((rb - rn) / static_cast<double>(n_min));
    }
    std::sort(deltas.begin(), deltas.end());
    const double median = 0.5 * (deltas[9] + deltas[10]);
    CHECK(median >= -0.05);
}
