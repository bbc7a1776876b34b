#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fixtrace/sampler.hpp"

namespace fixtrace::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kSeedEnvironmentVariable = "SPHERICAL_RMT_SEED";

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// --help: carries the usage text, not an error.
struct HelpRequested {
  std::string text;
};

enum class Command { density, verify_selberg, verify_integral_eq, semicircle_report, ratio, sample };

std::string_view to_string(Command command);
Command parse_command(std::string_view text);

enum class Format { csv, json };

struct CliConfig {
  std::optional<Command> command;  // empty: only --verify-manifest
  std::vector<int> n;
  std::size_t samples = 0;
  bool samples_given = false;
  std::size_t bins = 0;
  std::uint64_t seed = 1;
  unsigned streams = 1;
  std::filesystem::path out_dir = ".";
  Format format = Format::csv;
  sampler::Ensemble ensemble = sampler::Ensemble::fixed_trace;
  sampler::SamplingRoute route = sampler::SamplingRoute::dense;
  int kernel_offset = 0;
  std::optional<std::filesystem::path> verify_manifest;
};

// Command defaults for N, samples and bins.
CliConfig defaults_for(Command command);

// Parses argv-style arguments (without the program name). Values come from,
// in increasing priority: command defaults, the --config key=value file,
// flags, and env_seed for the seed. Throws UsageError on bad input and
// HelpRequested for --help.
CliConfig parse_arguments(const std::vector<std::string>& args,
                          const std::optional<std::string>& env_seed = std::nullopt);

// Executes the configured command. Writes outputs and manifest_<command>.json
// under out_dir; prints a summary (verification reports as JSON) to out.
int run(const CliConfig& config, std::ostream& out);

// parse_arguments + run with exit-code mapping; what the executable calls.
int main_entry(const std::vector<std::string>& args, const std::optional<std::string>& env_seed,
               std::ostream& out, std::ostream& err);

}  // namespace fixtrace::cli
