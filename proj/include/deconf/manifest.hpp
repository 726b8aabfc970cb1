#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deconf {

inline constexpr const char *kToolVersion = "0.1.0";

// Sidecar written next to every produced artifact (<artifact>.manifest.json)
// recording what made it: tool version, fingerprint of the parsed WordNet
// content, the effective configuration, and per-stage wall times.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::uint64_t graph_fingerprint = 0;
  std::map<std::string, std::string> config; // flag -> rendered value
  std::vector<std::pair<std::string, double>> timings_s;
};

std::filesystem::path manifest_path_for(const std::filesystem::path &artifact);

void write_manifest(const std::filesystem::path &artifact,
                    const RunManifest &manifest);

// Missing sidecar -> nullopt; malformed one -> ParseError.
std::optional<RunManifest> read_manifest(const std::filesystem::path &artifact);

} // namespace deconf
