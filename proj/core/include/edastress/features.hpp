#pragma once

#include "edastress/dsp.hpp"
#include "edastress/signal.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edastress {

inline constexpr std::size_t kFeatureCount = 25;
inline constexpr const char* kFeatureSetVersion = "eda25-v1";

// Fixed feature order; the CSV header is derived from this list.
const std::array<std::string, kFeatureCount>& feature_names();

// Tonic (SCL) / phasic (SCR) split with tonic + phasic == signal.
struct Decomposition {
    std::vector<double> tonic;
    std::vector<double> phasic;
};

// Tonic is a centered 8 s moving median (window clamped at the edges);
// phasic is the residual. Records shorter than half the median window fall
// back to a global-median tonic.
Decomposition decompose(std::span<const double> samples, double sampling_rate_hz);

struct ScrEvent {
    std::size_t onset_index = 0;
    std::size_t peak_index = 0;
    double amplitude = 0.0; // phasic[peak] - phasic[onset], microsiemens
    double rise_time_s = 0.0;
};

inline constexpr double kScrAmplitudeThresholdUs = 0.01;

// Onsets at upward zero-crossings of the first difference; the peak is the
// first local maximum after the onset; rises smaller than the 0.01 uS
// threshold are discarded. Events are ordered and non-overlapping.
std::vector<ScrEvent> detect_scr_events(std::span<const double> phasic,
                                        double sampling_rate_hz);

struct WindowFeatures {
    std::string subject_id;
    double t_start_s = 0.0;
    std::uint8_t label = 0;
    std::array<double, kFeatureCount> values{};
};

// Feature vector for one window given aligned raw/tonic/phasic slices.
// Windows with no detected SCR event get zeros for the amplitude and
// rise-time aggregates so no NaN ever reaches a learner.
std::array<double, kFeatureCount> compute_features(std::span<const double> raw,
                                                   std::span<const double> tonic,
                                                   std::span<const double> phasic,
                                                   double sampling_rate_hz);

struct ExtractOptions {
    double window_s = 60.0;
    double shift_s = 30.0;
    double filter_cutoff_hz = 5.0;
    int filter_order = 4;
};

struct ExtractResult {
    std::vector<WindowFeatures> rows;
    bool filtered = false;         // whether the conditional low-pass ran
    bool record_too_short = false;
    std::size_t windows_dropped_tie = 0;
};

// Full per-record pipeline: conditional low-pass, record-level decomposition,
// windowing, majority-vote labels (ties dropped), features.
ExtractResult extract_features(const SignalRecord& record, const ExtractOptions& opts = {});

// Feature file: header `subject_id,t_start_s,label,f01_...,f25_...`.
void write_features_csv(const std::filesystem::path& path,
                        const std::vector<WindowFeatures>& rows);
std::vector<WindowFeatures> load_features_csv(const std::filesystem::path& path);

} // namespace edastress
