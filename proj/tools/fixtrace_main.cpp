#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fixtrace/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> env_seed;
  if (const char* value = std::getenv(fixtrace::cli::kSeedEnvironmentVariable)) env_seed = value;
  return fixtrace::cli::main_entry(args, env_seed, std::cout, std::cerr);
}
