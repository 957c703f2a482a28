#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gantsne {

// FNV-1a 64-bit digest of a file's bytes (manifest provenance).
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

struct ManifestInput {
    std::filesystem::path path;
    std::uint64_t digest = 0;
    std::uint64_t bytes = 0;
};

// Reproducibility record written before any long computation starts: the
// command, every resolved config value, the seed, and digests of all inputs.
struct RunManifest {
    std::string command;
    std::string version;
    std::string timestamp_utc;
    std::uint64_t seed = 0;
    nlohmann::json config; // fully materialized, defaults included
    std::vector<ManifestInput> inputs;
};

RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          nlohmann::json config,
                          const std::vector<std::filesystem::path>& inputs);

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);

} // namespace gantsne
