#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace edastress {

// Reproducibility record written next to every command's outputs. The
// manifest hash covers only the deterministic fields (command, config,
// seeds, input hashes, versions) so reruns with identical inputs yield
// identical hashes; the wall-clock timestamp is recorded but excluded.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config; // flag -> value snapshot
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_hashes; // path -> hash
    std::string feature_set_version;
    std::string grid_version;
    std::string created_at; // ISO 8601, not hashed

    void add_input(const std::filesystem::path& path);

    // FNV-1a over the canonical serialization of the hashed fields.
    std::string hash() const;

    nlohmann::ordered_json to_json() const;
    void write(const std::filesystem::path& path) const;
};

std::string hash_file(const std::filesystem::path& path);
std::string current_timestamp();

} // namespace edastress
