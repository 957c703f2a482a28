#include "gantsne/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "gantsne/errors.hpp"
#include "gantsne/version.hpp"

namespace gantsne {

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::uint64_t hash = 14695981039346656037ULL;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof buffer);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          nlohmann::json config,
                          const std::vector<std::filesystem::path>& inputs) {
    RunManifest manifest;
    manifest.command = command;
    manifest.version = kVersion;
    manifest.seed = seed;
    manifest.config = std::move(config);

    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  utc.tm_year + 1900, utc.tm_mon + 1, utc.tm_mday, utc.tm_hour,
                  utc.tm_min, utc.tm_sec);
    manifest.timestamp_utc = stamp;

    for (const auto& path : inputs) {
        ManifestInput entry;
        entry.path = path;
        entry.digest = fnv1a64_file(path);
        entry.bytes = std::filesystem::file_size(path);
        manifest.inputs.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["version"] = manifest.version;
    doc["timestamp_utc"] = manifest.timestamp_utc;
    doc["seed"] = manifest.seed;
    doc["config"] = manifest.config;
    doc["inputs"] = nlohmann::json::array();
    for (const auto& input : manifest.inputs) {
        char digest_hex[17];
        std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                      static_cast<unsigned long long>(input.digest));
        doc["inputs"].push_back({{"path", input.path.string()},
                                 {"fnv1a64", digest_hex},
                                 {"bytes", input.bytes}});
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

} // namespace gantsne
