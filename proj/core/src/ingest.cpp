#include "edastress/ingest.hpp"

#include "edastress/csv.hpp"
#include "edastress/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace edastress {

std::string device_name(Device d) {
    switch (d) {
    case Device::chest: return "chest";
    case Device::wrist: return "wrist";
    case Device::finger: return "finger";
    case Device::synthetic: return "synthetic";
    }
    return "synthetic";
}

Device device_from_name(const std::string& name) {
    if (name == "chest") return Device::chest;
    if (name == "wrist") return Device::wrist;
    if (name == "finger") return Device::finger;
    if (name == "synthetic") return Device::synthetic;
    throw_data("unknown device '" + name + "'");
}

void SignalRecord::validate() const {
    if (sampling_rate_hz <= 0.0) {
        throw_data("record " + subject_id + ": sampling_rate_hz must be positive");
    }
    if (samples.size() != labels.size()) {
        throw_data("record " + subject_id + ": samples/labels length mismatch");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw_data("record " + subject_id + ": non-finite sample at index " +
                       std::to_string(i));
        }
        if (labels[i] > 1) {
            throw_data("record " + subject_id + ": label out of {0,1} at index " +
                       std::to_string(i));
        }
    }
}

std::vector<std::uint8_t> threshold_labels(const ContinuousStressLabel& continuous) {
    if (!(continuous.threshold > 0.0 && continuous.threshold < 1.0)) {
        throw_data("stress threshold must lie in (0,1)");
    }
    std::vector<std::uint8_t> out;
    out.reserve(continuous.values.size());
    for (std::size_t i = 0; i < continuous.values.size(); ++i) {
        const double v = continuous.values[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw_data("continuous stress value " + csv::format_double(v) +
                       " at index " + std::to_string(i) + " outside [0,1]");
        }
        out.push_back(v >= continuous.threshold ? 1 : 0);
    }
    return out;
}

namespace {

fs::path sidecar_path(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

} // namespace

SignalRecord load_canonical(const fs::path& csv_path) {
    std::ifstream meta_in(sidecar_path(csv_path));
    if (!meta_in) {
        throw_data("missing sidecar " + sidecar_path(csv_path).string());
    }
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw_data("malformed sidecar " + sidecar_path(csv_path).string() + ": " + e.what());
    }

    SignalRecord rec;
    try {
        rec.subject_id = meta.at("subject_id").get<std::string>();
        rec.device = device_from_name(meta.at("device").get<std::string>());
        rec.sampling_rate_hz = meta.at("sampling_rate_hz").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw_data("sidecar " + sidecar_path(csv_path).string() +
                   " missing required field: " + e.what());
    }
    const auto n_samples = meta.at("n_samples").get<std::size_t>();

    std::ifstream in(csv_path);
    if (!in) throw_data("cannot open " + csv_path.string());

    std::string line;
    if (!std::getline(in, line)) throw_data(csv_path.string() + ": empty file");
    if (line == "t_s,eda_us,label\r") line.pop_back();
    if (line != "t_s,eda_us,label") {
        throw_data(csv_path.string() + ": expected header 't_s,eda_us,label', got '" + line + "'");
    }

    std::size_t line_no = 1;
    double prev_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        const std::string where = csv_path.filename().string() + " line " + std::to_string(line_no);
        if (fields.size() != 3) {
            throw_data(where + ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        const double t = csv::parse_double(fields[0], where);
        const double eda = csv::parse_double(fields[1], where);
        const long label = csv::parse_long(fields[2], where);
        if (t <= prev_t) throw_data(where + ": t_s not strictly increasing");
        prev_t = t;
        if (label != 0 && label != 1) throw_data(where + ": label must be 0 or 1");
        rec.samples.push_back(eda);
        rec.labels.push_back(static_cast<std::uint8_t>(label));
    }

    if (rec.samples.size() != n_samples) {
        throw_data(csv_path.string() + ": sidecar declares " + std::to_string(n_samples) +
                   " samples but file has " + std::to_string(rec.samples.size()));
    }
    rec.validate();
    return rec;
}

fs::path write_canonical(const SignalRecord& record, const fs::path& dir) {
    record.validate();
    const std::string stem = record.subject_id + "_" + device_name(record.device);
    const fs::path csv_path = dir / (stem + ".csv");

    std::ofstream out(csv_path);
    if (!out) throw_data("cannot write " + csv_path.string());
    out << "t_s,eda_us,label\n";
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
        out << csv::format_double(static_cast<double>(i) / record.sampling_rate_hz)
            << ',' << csv::format_double(record.samples[i])
            << ',' << static_cast<int>(record.labels[i]) << '\n';
    }

    nlohmann::ordered_json meta{
        {"subject_id", record.subject_id},
        {"device", device_name(record.device)},
        {"sampling_rate_hz", record.sampling_rate_hz},
        {"n_samples", record.samples.size()},
    };
    std::ofstream meta_out(sidecar_path(csv_path));
    if (!meta_out) throw_data("cannot write " + sidecar_path(csv_path).string());
    meta_out << meta.dump(2) << '\n';
    return csv_path;
}

} // namespace edastress
