#include "edastress/dsp.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace edastress;

namespace {

// Oracle: expand the biquad cascade into a single rational transfer function
// b(z)/a(z) by polynomial multiplication, then long-divide to get the
// impulse response. Independent of the streaming apply_filter path.
std::vector<double> impulse_response_by_division(const FilterDesign& d, std::size_t len) {
    std::vector<double> b = {1.0}, a = {1.0};
    const auto mul = [](const std::vector<double>& p, const std::vector<double>& q) {
        std::vector<double> out(p.size() + q.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
        }
        return out;
    };
    for (const Biquad& s : d.sections) {
        b = mul(b, {s.b0, s.b1, s.b2});
        a = mul(a, {1.0, s.a1, s.a2});
    }
    std::vector<double> h(len, 0.0);
    for (std::size_t n = 0; n < len; ++n) {
        double v = n < b.size() ? b[n] : 0.0;
        for (std::size_t k = 1; k < a.size() && k <= n; ++k) v -= a[k] * h[n - k];
        h[n] = v;
    }
    return h;
}

} // namespace

TEST_CASE("should_filter implements the open-interval Nyquist rule") {
    CHECK(should_filter(700.0, 5.0));        // normalized 0.0143
    CHECK_FALSE(should_filter(4.0, 5.0));    // normalized 2.5
    CHECK_FALSE(should_filter(10.0, 5.0));   // normalized exactly 1
    CHECK_THROWS_AS(should_filter(0.0, 5.0), Error);
    CHECK_THROWS_AS(should_filter(700.0, -1.0), Error);
}

TEST_CASE("should_filter is scale invariant") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const double fs = rng.uniform(0.5, 1000.0);
        const double cutoff = rng.uniform(0.01, 600.0);
        const double k = rng.uniform(0.001, 100.0);
        CHECK(should_filter(fs, cutoff) == should_filter(k * fs, k * cutoff));
    }
}

TEST_CASE("butterworth design: gain pins") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    REQUIRE(d.sections.size() == 2);
    CHECK(std::abs(frequency_response(d, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(frequency_response(d, 5.0)) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(std::abs(frequency_response(d, 50.0)) < 1e-3);

    // Stability: poles strictly inside the unit circle.
    for (const Biquad& s : d.sections) {
        CHECK(s.a2 < 1.0);
        CHECK(std::abs(s.a1) < 1.0 + s.a2);
    }
}

TEST_CASE("butterworth magnitude matches the reference design") {
    // |H(f)| pinned from an independent filter-design implementation.
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    const struct { double f, mag; } pins[] = {
        {1.0, 0.999998721651585},
        {2.5, 0.998054533318852},
        {10.0, 0.0622531834509119},
        {20.0, 0.0038670006115948},
        {50.0, 9.34943760945666e-05},
        {100.0, 4.71763796984469e-06},
    };
    for (const auto& p : pins) {
        CHECK(std::abs(frequency_response(d, p.f)) == doctest::Approx(p.mag).epsilon(1e-9));
    }
}

TEST_CASE("butterworth design preconditions") {
    CHECK_THROWS_AS(design_butterworth_lowpass(3, 5.0, 700.0), Error);
    CHECK_THROWS_AS(design_butterworth_lowpass(0, 5.0, 700.0), Error);
    CHECK_THROWS_AS(design_butterworth_lowpass(4, 5.0, 10.0), Error); // cutoff at Nyquist
    CHECK_THROWS_AS(design_butterworth_lowpass(4, 5.0, 4.0), Error);
}

TEST_CASE("apply_filter: constant input converges to its value") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    std::vector<double> x(4096, 2.5);
    const auto y = apply_filter(d, x);
    REQUIRE(y.size() == x.size());
    CHECK(y.back() == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("apply_filter: impulse response matches polynomial division") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    std::vector<double> impulse(2048, 0.0);
    impulse[0] = 1.0;
    const auto h = apply_filter(d, impulse);
    const auto h_ref = impulse_response_by_division(d, impulse.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) max_err = std::max(max_err, std::abs(h[i] - h_ref[i]));
    CHECK(max_err < 1e-6);
}

TEST_CASE("apply_filter: 100 Hz sine at fs 700 is attenuated below 1%") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    std::vector<double> x(7000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::sin(2.0 * 3.14159265358979 * 100.0 * static_cast<double>(i) / 700.0);
    }
    const auto y = apply_filter(d, x);
    double rms_in = 0.0, rms_out = 0.0;
    for (std::size_t i = 1000; i < x.size(); ++i) { // skip transient
        rms_in += x[i] * x[i];
        rms_out += y[i] * y[i];
    }
    CHECK(std::sqrt(rms_out) < 0.01 * std::sqrt(rms_in));
}

TEST_CASE("apply_filter is linear") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    Rng rng(3);
    std::vector<double> x(512), y(512), combo(512);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
        combo[i] = 1.7 * x[i] - 0.4 * y[i];
    }
    const auto fx = apply_filter(d, x);
    const auto fy = apply_filter(d, y);
    const auto fc = apply_filter(d, combo);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(fc[i] == doctest::Approx(1.7 * fx[i] - 0.4 * fy[i]).epsilon(1e-9));
    }
}

TEST_CASE("apply_filter rejects NaN and empty input") {
    const FilterDesign d = design_butterworth_lowpass(4, 5.0, 700.0);
    CHECK_THROWS_AS(apply_filter(d, std::vector<double>{}), Error);
    std::vector<double> x(10, 1.0);
    x[4] = std::nan("");
    CHECK_THROWS_AS(apply_filter(d, x), Error);
}

TEST_CASE("window_slices: counts from the worked examples") {
    // 300 s at 4 Hz with 60/30 -> 9 windows.
    auto plan = window_slices(1200, 4.0);
    CHECK(plan.windows.size() == 9);
    CHECK_FALSE(plan.record_too_short);

    // Exactly one window.
    plan = window_slices(240, 4.0);
    CHECK(plan.windows.size() == 1);
    CHECK(plan.windows[0].start == 0);
    CHECK(plan.windows[0].end == 240);

    // 59 s -> no full window, flagged.
    plan = window_slices(236, 4.0);
    CHECK(plan.windows.empty());
    CHECK(plan.record_too_short);
}

TEST_CASE("window_slices: count formula holds for randomized sizes") {
    Rng rng(11);
    for (int rep = 0; rep < 300; ++rep) {
        const double fs = 1.0 + static_cast<double>(rng.index(16));
        const auto w_samp = 2 + rng.index(200);
        const auto s_samp = 1 + rng.index(150);
        const auto n = rng.index(4000);
        const double window_s = static_cast<double>(w_samp) / fs;
        const double shift_s = static_cast<double>(s_samp) / fs;
        const auto plan = window_slices(n, fs, window_s, shift_s);
        if (n < w_samp) {
            CHECK(plan.record_too_short);
            continue;
        }
        const std::size_t expected = (n - w_samp) / s_samp + 1;
        REQUIRE(plan.windows.size() == expected);
        for (const Window& w : plan.windows) {
            CHECK(w.end - w.start == w_samp);
            CHECK(w.end <= n);
        }
        // Each covered index is hit at most ceil(W/S) times.
        const std::size_t max_hits = (w_samp + s_samp - 1) / s_samp;
        std::vector<std::size_t> hits(n, 0);
        for (const Window& w : plan.windows) {
            for (std::size_t i = w.start; i < w.end; ++i) ++hits[i];
        }
        for (std::size_t i = 0; i < plan.windows.back().end; ++i) {
            CHECK(hits[i] <= max_hits);
        }
    }
}

TEST_CASE("window_label: majority vote with tie drop") {
    std::vector<std::uint8_t> all_one(10, 1);
    CHECK(window_label(all_one) == std::uint8_t{1});

    std::vector<std::uint8_t> seventy(10, 0);
    for (int i = 0; i < 7; ++i) seventy[static_cast<std::size_t>(i)] = 1;
    CHECK(window_label(seventy) == std::uint8_t{1});

    std::vector<std::uint8_t> tie = {0, 1, 0, 1};
    CHECK_FALSE(window_label(tie).has_value());
}
