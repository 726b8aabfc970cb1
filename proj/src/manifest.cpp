#include "deconf/manifest.hpp"
#include "deconf/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>

namespace deconf {

namespace {

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fp);
  return buf;
}

} // namespace

std::filesystem::path
manifest_path_for(const std::filesystem::path &artifact) {
  std::filesystem::path p = artifact;
  p += ".manifest.json";
  return p;
}

void write_manifest(const std::filesystem::path &artifact,
                    const RunManifest &manifest) {
  nlohmann::json j;
  j["toolVersion"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["graphFingerprint"] = fingerprint_hex(manifest.graph_fingerprint);
  j["config"] = manifest.config;
  nlohmann::json timings = nlohmann::json::object();
  for (const auto &[stage, secs] : manifest.timings_s)
    timings[stage] = secs;
  j["timingsSeconds"] = timings;

  const auto path = manifest_path_for(artifact);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IntegrityError("cannot write manifest: " + path.string());
  os << j.dump(2) << '\n';
}

std::optional<RunManifest>
read_manifest(const std::filesystem::path &artifact) {
  const auto path = manifest_path_for(artifact);
  std::ifstream is(path, std::ios::binary);
  if (!is)
    return std::nullopt;
  RunManifest m;
  try {
    nlohmann::json j = nlohmann::json::parse(is);
    m.tool_version = j.value("toolVersion", std::string{});
    m.command = j.value("command", std::string{});
    const std::string fp = j.value("graphFingerprint", std::string{"0"});
    m.graph_fingerprint = std::stoull(fp, nullptr, 16);
    if (j.contains("config"))
      for (auto &[k, v] : j.at("config").items())
        m.config[k] = v.get<std::string>();
    if (j.contains("timingsSeconds"))
      for (auto &[k, v] : j.at("timingsSeconds").items())
        m.timings_s.emplace_back(k, v.get<double>());
  } catch (const std::exception &e) {
    throw ParseError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

} // namespace deconf
