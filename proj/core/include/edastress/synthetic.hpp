#pragma once

#include "edastress/signal.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace edastress {

// One block of the alternating stress/non-stress protocol.
struct Segment {
    double duration_s = 0.0;
    std::uint8_t label = 0;
};

// Desk-scale stand-in for a lab stress protocol. Per subject the generator
// draws a tonic baseline, drops Poisson-timed SCR pulses whose rate and
// amplitude depend on the segment condition, and adds Gaussian noise.
//
// SCR pulse shape: peak amplitude A at the event time, half-Gaussian rise
// over the preceding second (sigma = 1/3 s), exponential decay with a 3 s
// time constant afterwards.
//
// The per-subject scale ranges model between-subject heterogeneity: each
// subject gets one multiplier for both event rates and one for amplitudes,
// drawn uniformly from these ranges. {1,1} disables the jitter.
struct SyntheticConfig {
    int n_subjects = 7;
    double sampling_rate_hz = 5.0;
    std::vector<Segment> segment_plan; // empty -> filled by default_plan()
    std::pair<double, double> baseline_scl_us = {2.0, 12.0};
    double scr_rate_stress_per_min = 10.0;
    double scr_rate_nonstress_per_min = 2.0;
    std::pair<double, double> amp_stress_us = {0.3, 1.0};
    std::pair<double, double> amp_nonstress_us = {0.1, 0.4};
    // Kept well below the 0.01 uS SCR detection threshold so noise wiggles
    // do not register as events at wearable sampling rates.
    double noise_std_us = 0.003;
    std::pair<double, double> subject_rate_scale = {1.0, 1.0};
    std::pair<double, double> subject_amp_scale = {1.0, 1.0};
    std::uint64_t rng_seed = 1;

    // n_segments alternating blocks of segment_s seconds, non-stress first.
    static std::vector<Segment> default_plan(int n_segments = 10, double segment_s = 120.0);

    void validate() const;
};

// Deterministic given rng_seed; subjects are named s01, s02, ... and tagged
// Device::synthetic. See SyntheticConfig for the signal model.
std::vector<SignalRecord> generate_synthetic(const SyntheticConfig& config);

} // namespace edastress
