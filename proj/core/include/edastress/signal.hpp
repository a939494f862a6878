#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edastress {

enum class Device { chest, wrist, finger, synthetic };

std::string device_name(Device d);
Device device_from_name(const std::string& name);

// One subject/device EDA stream: conductance in microsiemens plus a binary
// stress label per sample.
struct SignalRecord {
    std::string subject_id;
    Device device = Device::synthetic;
    double sampling_rate_hz = 0.0;
    std::vector<double> samples;
    std::vector<std::uint8_t> labels; // 0 = non-stress, 1 = stress

    std::size_t size() const { return samples.size(); }

    // Enforces the type invariants: equal lengths, positive rate, finite
    // samples, labels in {0,1}. Throws a data error on violation.
    void validate() const;
};

} // namespace edastress
