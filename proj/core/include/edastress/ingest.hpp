#pragma once

#include "edastress/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace edastress {

// Continuous stress rating in [0,1] plus the cut point that binarizes it.
// The 0.4 default is the threshold used for driver-stress ratings.
struct ContinuousStressLabel {
    std::vector<double> values;
    double threshold = 0.4;
};

// Elementwise label = 1 iff value >= threshold. A value equal to the
// threshold counts as stress. Values outside [0,1] raise a data error.
std::vector<std::uint8_t> threshold_labels(const ContinuousStressLabel& continuous);

// Loads `<subject>_<device>.csv` (header `t_s,eda_us,label`) together with
// its JSON sidecar `<subject>_<device>.json`. Parse failures report the
// offending line number; a sidecar/data length mismatch is a schema error.
SignalRecord load_canonical(const std::filesystem::path& csv_path);

// Writes the CSV + sidecar pair for a record into `dir`, named
// `<subject>_<device>.{csv,json}`. Returns the CSV path. Values are written
// with 12 significant digits so load(write(r)) reproduces r.
std::filesystem::path write_canonical(const SignalRecord& record,
                                      const std::filesystem::path& dir);

} // namespace edastress
