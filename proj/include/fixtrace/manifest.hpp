#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fixtrace::manifest {

inline constexpr int kSchemaVersion = 1;

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct OutputRecord {
  std::string path;  // relative to the manifest's directory
  std::string sha256;
};

// Everything needed to reproduce a run. Digests are recorded after the
// outputs are written.
struct RunManifest {
  std::string command;
  std::uint64_t master_seed = 0;
  std::vector<int> n;
  std::size_t num_samples = 0;
  unsigned num_streams = 1;
  std::size_t bin_count = 0;
  std::string sampling_route = "dense";
  std::size_t retries = 0;
  std::vector<OutputRecord> outputs;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Writes `content` under `directory / name` and records its digest.
void write_output(RunManifest& manifest, const std::filesystem::path& directory,
                  const std::string& name, std::string_view content);

void save(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load(const std::filesystem::path& path);

// Recomputes every digest; returns a description of each mismatch (empty
// when all outputs match).
std::vector<std::string> verify(const std::filesystem::path& manifest_path);

}  // namespace fixtrace::manifest
