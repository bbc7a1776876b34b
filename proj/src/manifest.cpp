#include "fixtrace/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "fixtrace/errors.hpp"

namespace fixtrace::manifest {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("sha256: digest computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream content;
  content << in.rdbuf();
  return sha256_hex(content.str());
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["master_seed"] = master_seed;
  j["N"] = n;
  j["num_samples"] = num_samples;
  j["num_streams"] = num_streams;
  j["bin_count"] = bin_count;
  j["sampling_route"] = sampling_route;
  j["gue_convention"] =
      "density exp(-tr M^2): diagonal variance 1/2, off-diagonal real/imag variance 1/4";
  j["sampling_retries"] = retries;
  auto outputs_json = nlohmann::ordered_json::array();
  for (const auto& o : outputs) outputs_json.push_back({{"path", o.path}, {"sha256", o.sha256}});
  j["outputs"] = outputs_json;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw InconsistencyError("manifest: unsupported schema_version");
  }
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.n = j.at("N").get<std::vector<int>>();
  m.num_samples = j.at("num_samples").get<std::size_t>();
  m.num_streams = j.at("num_streams").get<unsigned>();
  m.bin_count = j.at("bin_count").get<std::size_t>();
  m.sampling_route = j.at("sampling_route").get<std::string>();
  m.retries = j.value("sampling_retries", std::size_t{0});
  for (const auto& o : j.at("outputs")) {
    m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
  }
  return m;
}

void write_output(RunManifest& manifest, const std::filesystem::path& directory,
                  const std::string& name, std::string_view content) {
  const auto path = directory / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  manifest.outputs.push_back({name, sha256_file(path)});
}

void save(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.to_json().dump(2) << "\n";
}

RunManifest load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return RunManifest::from_json(nlohmann::json::parse(in));
}

std::vector<std::string> verify(const std::filesystem::path& manifest_path) {
  const RunManifest m = load(manifest_path);
  const auto directory = manifest_path.parent_path();
  std::vector<std::string> problems;
  for (const auto& o : m.outputs) {
    const auto path = directory / o.path;
    if (!std::filesystem::exists(path)) {
      problems.push_back(o.path + ": missing");
      continue;
    }
    const std::string actual = sha256_file(path);
    if (actual != o.sha256) problems.push_back(o.path + ": digest " + actual + " != " + o.sha256);
  }
  return problems;
}

}  // namespace fixtrace::manifest
