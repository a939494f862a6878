#pragma once

#include "edastress/signal.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace edastress {

// One second-order section, normalized so a0 == 1.
struct Biquad {
    double b0, b1, b2;
    double a1, a2;
};

struct FilterDesign {
    int order = 4;
    double cutoff_hz = 5.0;
    double sampling_rate_hz = 0.0;
    std::vector<Biquad> sections;
};

// The preprocessing rule: a record is low-pass filtered only when the
// normalized cutoff cutoff/(fs/2) lies strictly inside (0, 1). At 700 Hz a
// 5 Hz cutoff qualifies; at 4 Hz it does not.
bool should_filter(double sampling_rate_hz, double cutoff_hz);

// Bilinear-transform Butterworth low-pass with frequency pre-warping,
// returned as a cascade of order/2 biquads each normalized to unit DC gain.
// Requires an even order >= 2 and a valid normalized cutoff.
FilterDesign design_butterworth_lowpass(int order, double cutoff_hz,
                                        double sampling_rate_hz);

// Complex frequency response of the cascade at frequency f (Hz).
std::complex<double> frequency_response(const FilterDesign& design, double f_hz);

// Causal forward pass through the cascade (transposed direct-form II).
// Output length equals input length. NaN input is a data error.
std::vector<double> apply_filter(const FilterDesign& design,
                                 std::span<const double> samples);

// Half-open sample range [start, end) of one analysis window.
struct Window {
    std::size_t start = 0;
    std::size_t end = 0;
    double start_time_s = 0.0;
};

struct WindowPlan {
    std::vector<Window> windows;
    bool record_too_short = false; // set when the record holds no full window
};

// Windows anchored at offsets 0, shift, 2*shift, ... ; the trailing partial
// window is discarded. Count = floor((N - W)/S) + 1 in samples.
WindowPlan window_slices(std::size_t n_samples, double sampling_rate_hz,
                         double window_s = 60.0, double shift_s = 30.0);

// Majority vote over per-sample labels; an exact tie drops the window.
std::optional<std::uint8_t> window_label(std::span<const std::uint8_t> labels);

} // namespace edastress
