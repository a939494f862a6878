#include "edastress/manifest.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace edastress {

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot open " + path.string() + " for hashing");
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::string current_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
    input_hashes.emplace_back(path.string(), hash_file(path));
}

std::string RunManifest::hash() const {
    std::ostringstream os;
    os << command << '\n' << seed << '\n';
    for (const auto& [k, v] : config) os << k << '=' << v << '\n';
    for (const auto& [p, h] : input_hashes) os << p << ':' << h << '\n';
    os << feature_set_version << '\n' << grid_version << '\n';
    const std::string body = os.str();
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(body)));
    return out;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    for (const auto& [p, h] : input_hashes) {
        inputs.push_back({{"path", p}, {"hash", h}});
    }
    j["inputs"] = std::move(inputs);
    j["feature_set_version"] = feature_set_version;
    j["grid_version"] = grid_version;
    j["manifest_hash"] = hash();
    j["created_at"] = created_at;
    return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

} // namespace edastress
