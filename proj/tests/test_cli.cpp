#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtrace/cli.hpp"
#include "fixtrace/manifest.hpp"
#include "json.hpp"

using namespace fixtrace;
using namespace fixtrace::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("FIXTRACE_TEST_TMP");
  const fs::path dir = (root ? fs::path(root) : fs::temp_directory_path() / "fixtrace_cli") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args, std::optional<std::string> env_seed = std::nullopt) {
  std::ostringstream out;
  std::ostringstream err;
  const int status = main_entry(args, env_seed, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("command defaults") {
  const auto semi = defaults_for(Command::semicircle_report);
  CHECK(semi.n == std::vector<int>{10, 50, 100});
  CHECK(semi.samples == 20'000);
  const auto ieq = defaults_for(Command::verify_integral_eq);
  CHECK(ieq.n == std::vector<int>{2, 4, 8});
  CHECK(ieq.samples == 200'000);
  CHECK(defaults_for(Command::density).bins == 200);
  for (auto c : {Command::density, Command::verify_selberg, Command::verify_integral_eq,
                 Command::semicircle_report, Command::ratio, Command::sample}) {
    CHECK(parse_command(to_string(c)) == c);
  }
}

TEST_CASE("flag parsing") {
  const auto config = parse_arguments({"density", "--N", "2, 5,9", "--samples", "123", "--seed",
                                       "18446744073709551615", "--streams", "3", "--format",
                                       "json", "--ensemble", "gue", "--route", "tridiagonal",
                                       "--out-dir", "x/y"});
  CHECK(config.command == Command::density);
  CHECK(config.n == std::vector<int>{2, 5, 9});
  CHECK(config.samples == 123);
  CHECK(config.samples_given);
  CHECK(config.seed == 18446744073709551615ull);
  CHECK(config.streams == 3);
  CHECK(config.format == Format::json);
  CHECK(config.ensemble == sampler::Ensemble::gue);
  CHECK(config.route == sampler::SamplingRoute::tridiagonal);
  CHECK(config.out_dir == fs::path("x/y"));
  // Flags may also precede the command.
  CHECK(parse_arguments({"--bins", "17", "ratio"}).bins == 17);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(parse_arguments({}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"frobnicate"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--N", "0"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--N", "3,x"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--samples", "-4"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--seed", "1.5"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--format", "xml"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--route", "qr"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--unknown", "1"}), UsageError);
  CHECK_THROWS_AS(parse_arguments({"density"}, std::string("seven")), UsageError);
  CHECK(call({"density", "--bins", "zero"}).status == kExitUsage);
  CHECK(call({"verify-integral-eq", "--N", "1", "--out-dir", scratch("n1").string()}).status ==
        kExitUsage);
  const auto help = call({"--help"});
  CHECK(help.status == kExitPass);
  CHECK(help.out.find("semicircle-report") != std::string::npos);
}

TEST_CASE("config file, flags and environment precedence") {
  const auto dir = scratch("config");
  const auto file = dir / "run.conf";
  std::ofstream(file) << "# comment\nN = 3,4\nsamples=50\nseed=5\nout_dir=" << dir.string()
                      << "\nbins=30\n";
  const auto from_file = parse_arguments({"density", "--config", file.string()});
  CHECK(from_file.n == std::vector<int>{3, 4});
  CHECK(from_file.samples == 50);
  CHECK(from_file.seed == 5);
  CHECK(from_file.bins == 30);
  CHECK(from_file.out_dir == dir);

  const auto flags_win =
      parse_arguments({"density", "--config", file.string(), "--seed", "6", "--N", "2"});
  CHECK(flags_win.seed == 6);
  CHECK(flags_win.n == std::vector<int>{2});
  CHECK(flags_win.samples == 50);

  const auto env_wins =
      parse_arguments({"density", "--config", file.string(), "--seed", "6"}, std::string("9"));
  CHECK(env_wins.seed == 9);

  std::ofstream(dir / "bad.conf") << "colour=blue\n";
  CHECK_THROWS_AS(parse_arguments({"density", "--config", (dir / "bad.conf").string()}),
                  UsageError);
  CHECK_THROWS_AS(parse_arguments({"density", "--config", (dir / "missing.conf").string()}),
                  UsageError);
}

TEST_CASE("density output is byte identical across runs and stream counts") {
  const auto a = scratch("density_a");
  const auto b = scratch("density_b");
  const auto c = scratch("density_c");
  REQUIRE(call({"density", "--N", "2", "--samples", "1000", "--seed", "7", "--out-dir", a.string()})
              .status == kExitPass);
  REQUIRE(call({"density", "--N", "2", "--samples", "1000", "--seed", "7", "--out-dir", b.string()})
              .status == kExitPass);
  REQUIRE(call({"density", "--N", "2", "--samples", "1000", "--seed", "7", "--streams", "4",
                "--out-dir", c.string()})
              .status == kExitPass);
  const std::string name = "density_fixed_trace_N2.csv";
  const auto first = slurp(a / name);
  CHECK(!first.empty());
  CHECK(first == slurp(b / name));
  CHECK(first == slurp(c / name));
  CHECK(slurp(a / "manifest_density.json") == slurp(b / "manifest_density.json"));
  CHECK(first.rfind("# mass=2 N=2 kind=fixed_trace\n", 0) == 0);
  CHECK(first.find("\nx,density\n") != std::string::npos);

  // A different seed changes the output.
  const auto d = scratch("density_d");
  call({"density", "--N", "2", "--samples", "1000", "--seed", "8", "--out-dir", d.string()});
  CHECK(first != slurp(d / name));
}

TEST_CASE("gue density carries a reference column and json output parses") {
  const auto dir = scratch("gue");
  REQUIRE(call({"density", "--ensemble", "gue", "--N", "3", "--samples", "500", "--out-dir",
                dir.string()})
              .status == kExitPass);
  const auto csv = slurp(dir / "density_gue_N3.csv");
  CHECK(csv.find("\nx,density,reference\n") != std::string::npos);
  std::istringstream in(csv);
  const auto grid = DensityGrid::read_csv(in);
  CHECK(grid.n() == 3);
  CHECK(grid.kind() == "gue");

  REQUIRE(call({"density", "--format", "json", "--N", "3", "--samples", "500", "--out-dir",
                dir.string()})
              .status == kExitPass);
  const auto j = nlohmann::json::parse(slurp(dir / "density_fixed_trace_N3.json"));
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("x").size() == j.at("density").size());
}

TEST_CASE("manifest records digests and verifies") {
  const auto dir = scratch("manifest");
  REQUIRE(call({"sample", "--N", "3,4", "--samples", "5", "--out-dir", dir.string()}).status ==
          kExitPass);
  const auto manifest_path = dir / "manifest_sample.json";
  const auto m = manifest::load(manifest_path);
  CHECK(m.command == "sample");
  CHECK(m.n == std::vector<int>{3, 4});
  CHECK(m.outputs.size() == 2);
  for (const auto& o : m.outputs) CHECK(o.sha256 == manifest::sha256_file(dir / o.path));
  const auto raw = nlohmann::json::parse(slurp(manifest_path));
  CHECK(raw.at("schema_version") == 1);
  CHECK(raw.at("gue_convention").get<std::string>().find("variance 1/2") != std::string::npos);

  CHECK(call({"--verify-manifest", manifest_path.string()}).status == kExitPass);
  // Re-running the command against the manifest reproduces every digest.
  const auto again = scratch("manifest_again");
  CHECK(call({"sample", "--N", "3,4", "--samples", "5", "--out-dir", again.string(),
              "--verify-manifest", manifest_path.string()})
            .status == kExitPass);
  // Tampering is detected.
  std::ofstream(dir / m.outputs.front().path, std::ios::app) << "0,0,0\n";
  const auto tampered = call({"--verify-manifest", manifest_path.string()});
  CHECK(tampered.status == kExitFailure);
  CHECK(tampered.out.find("mismatch") != std::string::npos);
}

TEST_CASE("sha256 known answer") {
  CHECK(manifest::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(manifest::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("ratio and integral equation reports") {
  const auto dir = scratch("reports");
  REQUIRE(call({"ratio", "--N", "1,3", "--samples", "200", "--out-dir", dir.string()}).status ==
          kExitPass);
  const auto ratio = slurp(dir / "ratio.csv");
  CHECK(ratio.find("\nN,ratio,std_error\n1,1,0\n") != std::string::npos);

  const auto result = call({"verify-integral-eq", "--N", "3", "--samples", "20000", "--bins",
                            "100", "--out-dir", dir.string()});
  const auto report = nlohmann::json::parse(slurp(dir / "integral_eq.json"));
  CHECK(report.at("schema_version") == 1);
  const auto& row = report.at("reports").at(0);
  for (const char* key : {"N", "samples", "l1_distance", "sup_distance", "mc_error_budget", "pass"}) {
    CHECK(row.contains(key));
  }
  CHECK(result.status == (row.at("pass").get<bool>() ? kExitPass : kExitFailure));
  const auto overlay = slurp(dir / "integral_eq_N3.csv");
  CHECK(overlay.find("\nx,estimated,reference\n") != std::string::npos);
}

TEST_CASE("verify-selberg reports every row within tolerance") {
  const auto dir = scratch("selberg");
  const auto result = call({"verify-selberg", "--samples", "400000", "--out-dir", dir.string()});
  CHECK(result.status == kExitPass);
  const auto report = nlohmann::json::parse(slurp(dir / "verify_selberg.json"));
  CHECK(report.at("pass") == true);
  int quadrature_rows = 0;
  for (const auto& row : report.at("rows")) {
    CHECK(row.at("pass") == true);
    CHECK(row.contains("closed_form_log"));
    if (row.at("method") == "quadrature") {
      ++quadrature_rows;
      CHECK(row.at("relative_error").get<double>() <= 1e-6);
    }
  }
  CHECK(quadrature_rows >= 20);
}

}  // TEST_SUITE
