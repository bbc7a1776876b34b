#include "fixtrace/cli.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fixtrace/errors.hpp"
#include "fixtrace/gue.hpp"
#include "fixtrace/integral_eq.hpp"
#include "fixtrace/manifest.hpp"
#include "fixtrace/selberg_check.hpp"

namespace fixtrace::cli {

namespace {

using nlohmann::ordered_json;

constexpr int kReportSchemaVersion = 1;

constexpr std::array<std::pair<Command, std::string_view>, 6> kCommandNames{{
    {Command::density, "density"},
    {Command::verify_selberg, "verify-selberg"},
    {Command::verify_integral_eq, "verify-integral-eq"},
    {Command::semicircle_report, "semicircle-report"},
    {Command::ratio, "ratio"},
    {Command::sample, "sample"},
}};

// Keys shared by flags (--key) and the config file (key=value).
constexpr std::array<std::string_view, 10> kKeys{"N",      "samples",  "bins",     "seed",
                                                 "streams", "out-dir", "format",   "ensemble",
                                                 "route",   "kernel-offset"};

std::string canonical_key(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("--" + key + ": not an integer: '" + text + "'");
  }
  return value;
}

template <typename T>
T parse_positive(const std::string& key, const std::string& text) {
  const T value = parse_integer<T>(key, text);
  if (value <= 0) throw UsageError("--" + key + " must be positive");
  return value;
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> ns;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(std::string_view(text).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    ns.push_back(parse_positive<int>("N", piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return ns;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_number) + ": expected key=value");
    }
    const std::string key = canonical_key(trim(std::string_view(content).substr(0, eq)));
    bool known = false;
    for (auto k : kKeys) known = known || key == k;
    if (!known) {
      throw UsageError(path.string() + ":" + std::to_string(line_number) + ": unknown key '" +
                       key + "'");
    }
    values[key] = trim(std::string_view(content).substr(eq + 1));
  }
  return values;
}

void apply_value(CliConfig& config, const std::string& key, const std::string& value) {
  if (key == "N") {
    config.n = parse_n_list(value);
  } else if (key == "samples") {
    config.samples = parse_positive<std::size_t>(key, value);
    config.samples_given = true;
  } else if (key == "bins") {
    config.bins = parse_positive<std::size_t>(key, value);
  } else if (key == "seed") {
    config.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "streams") {
    config.streams = parse_positive<unsigned>(key, value);
  } else if (key == "out-dir") {
    if (value.empty()) throw UsageError("--out-dir must not be empty");
    config.out_dir = value;
  } else if (key == "format") {
    if (value == "csv") {
      config.format = Format::csv;
    } else if (value == "json") {
      config.format = Format::json;
    } else {
      throw UsageError("--format must be csv or json");
    }
  } else if (key == "ensemble") {
    try {
      config.ensemble = sampler::parse_ensemble(value);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--ensemble: ") + e.what());
    }
  } else if (key == "route") {
    try {
      config.route = sampler::parse_route(value);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--route: ") + e.what());
    }
  } else if (key == "kernel-offset") {
    config.kernel_offset = parse_integer<int>(key, value);
  }
}

std::string file_stem(Command command) {
  std::string name(to_string(command));
  for (auto& c : name) {
    if (c == '-') c = '_';
  }
  return name;
}

std::string tag(int n) { return "N" + std::to_string(n); }

struct RunContext {
  const CliConfig& config;
  manifest::RunManifest record;
  std::ostream& out;
};

void emit(RunContext& ctx, const std::string& name, const std::string& content) {
  manifest::write_output(ctx.record, ctx.config.out_dir, name, content);
}

sampler::SamplingPlan plan_for(const CliConfig& config, int n) {
  sampler::SamplingPlan plan;
  plan.master_seed = config.seed;
  plan.stream = static_cast<std::uint64_t>(n);
  plan.n = n;
  plan.num_samples = config.samples;
  plan.workers = config.streams;
  plan.ensemble = config.ensemble;
  plan.route = config.route;
  return plan;
}

int run_density(RunContext& ctx) {
  const auto& config = ctx.config;
  for (int n : config.n) {
    if (config.ensemble == sampler::Ensemble::gue && n > gue::kMaxLevels) {
      throw DomainError("density: N above " + std::to_string(gue::kMaxLevels) + " for gue");
    }
    const auto batch = sampler::generate_spectra(plan_for(config, n));
    ctx.record.retries += batch.retries;
    const auto histogram = sampler::estimate_density(
        batch.samples, config.bins, sampler::default_support(config.ensemble, n));
    const DensityGrid grid = histogram.grid();
    const bool with_reference = config.ensemble == sampler::Ensemble::gue;
    const std::string kind(sampler::to_string(config.ensemble));

    std::ostringstream text;
    if (config.format == Format::csv) {
      text << "# mass=" << format_number(grid.mass()) << " N=" << n << " kind=" << kind << "\n";
      text << "# samples=" << config.samples << " bins=" << config.bins
           << " seed=" << config.seed << " route=" << sampler::to_string(config.route)
           << " clipped_fraction=" << format_number(histogram.clipped_fraction) << "\n";
      text << (with_reference ? "x,density,reference\n" : "x,density\n");
      for (std::size_t i = 0; i < grid.size(); ++i) {
        text << format_number(grid.points()[i]) << ',' << format_number(grid.values()[i]);
        if (with_reference) {
          text << ',' << format_number(gue::gue_level_density(n, grid.points()[i]));
        }
        text << '\n';
      }
      emit(ctx, "density_" + kind + "_" + tag(n) + ".csv", text.str());
    } else {
      ordered_json j;
      j["schema_version"] = kReportSchemaVersion;
      j["N"] = n;
      j["kind"] = kind;
      j["mass"] = grid.mass();
      j["samples"] = config.samples;
      j["bins"] = config.bins;
      j["clipped_fraction"] = histogram.clipped_fraction;
      j["x"] = grid.points();
      j["density"] = grid.values();
      if (with_reference) {
        std::vector<double> reference;
        for (double x : grid.points()) reference.push_back(gue::gue_level_density(n, x));
        j["reference"] = reference;
      }
      emit(ctx, "density_" + kind + "_" + tag(n) + ".json", j.dump(2) + "\n");
    }
    ctx.out << "density N=" << n << " mass=" << format_number(grid.mass()) << "\n";
  }
  return kExitPass;
}

int run_sample(RunContext& ctx) {
  const auto& config = ctx.config;
  const std::string kind(sampler::to_string(config.ensemble));
  for (int n : config.n) {
    const auto batch = sampler::generate_spectra(plan_for(config, n));
    ctx.record.retries += batch.retries;
    std::ostringstream text;
    if (config.format == Format::csv) {
      text << "# N=" << n << " kind=" << kind << " samples=" << config.samples
           << " seed=" << config.seed << " route=" << sampler::to_string(config.route) << "\n";
      text << "sample,level,x\n";
      for (std::size_t s = 0; s < batch.samples.size(); ++s) {
        const auto& ev = batch.samples[s].eigenvalues;
        for (std::size_t i = 0; i < ev.size(); ++i) {
          text << s << ',' << i << ',' << format_number(ev[i]) << '\n';
        }
      }
      emit(ctx, "spectra_" + kind + "_" + tag(n) + ".csv", text.str());
    } else {
      ordered_json j;
      j["schema_version"] = kReportSchemaVersion;
      j["N"] = n;
      j["kind"] = kind;
      auto spectra = ordered_json::array();
      for (const auto& sample : batch.samples) spectra.push_back(sample.eigenvalues);
      j["spectra"] = spectra;
      emit(ctx, "spectra_" + kind + "_" + tag(n) + ".json", j.dump(2) + "\n");
    }
    ctx.out << "sample N=" << n << " spectra=" << batch.samples.size() << "\n";
  }
  return kExitPass;
}

int run_ratio(RunContext& ctx) {
  const auto& config = ctx.config;
  auto plan_config = config;
  plan_config.ensemble = sampler::Ensemble::fixed_trace;
  std::vector<std::pair<int, Estimate>> rows;
  for (int n : config.n) {
    const auto batch = sampler::generate_spectra(plan_for(plan_config, n));
    ctx.record.retries += batch.retries;
    rows.emplace_back(n, sampler::top_eigenvalue_ratio(batch.samples));
    ctx.out << "ratio N=" << n << " value=" << format_number(rows.back().second.value)
            << " std_error=" << format_number(rows.back().second.std_error) << "\n";
  }
  if (config.format == Format::csv) {
    std::ostringstream text;
    text << "# statistic=<max x^2>/<x_1^2> samples=" << config.samples << " seed=" << config.seed
         << "\n";
    text << "N,ratio,std_error\n";
    for (const auto& [n, e] : rows) {
      text << n << ',' << format_number(e.value) << ',' << format_number(e.std_error) << '\n';
    }
    emit(ctx, "ratio.csv", text.str());
  } else {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    auto list = ordered_json::array();
    for (const auto& [n, e] : rows) {
      list.push_back({{"N", n}, {"ratio", e.value}, {"std_error", e.std_error}});
    }
    j["rows"] = list;
    emit(ctx, "ratio.json", j.dump(2) + "\n");
  }
  return kExitPass;
}

int run_verify_selberg(RunContext& ctx) {
  const auto& config = ctx.config;
  selberg::SuiteOptions options;
  options.seed = config.seed;
  if (config.samples_given) options.mc_samples = config.samples;
  ctx.record.num_samples = options.mc_samples;
  const auto rows = selberg::run_selberg_suite(options);

  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  bool pass = true;
  auto list = ordered_json::array();
  for (const auto& row : rows) {
    pass = pass && row.pass;
    list.push_back({{"identity", row.identity},
                    {"parameters", row.parameters},
                    {"closed_form_log", row.closed_form_log},
                    {"closed_form", row.closed_form},
                    {"oracle", row.oracle},
                    {"oracle_std_error", row.oracle_std_error},
                    {"relative_error", row.relative_error},
                    {"method", selberg::to_string(row.method)},
                    {"pass", row.pass}});
  }
  j["rows"] = list;
  j["pass"] = pass;
  const std::string text = j.dump(2) + "\n";
  emit(ctx, "verify_selberg.json", text);
  ctx.out << text;
  return pass ? kExitPass : kExitFailure;
}

int run_verify_integral_eq(RunContext& ctx) {
  const auto& config = ctx.config;
  integral_eq::VerificationOptions options;
  options.exponent_offset = config.kernel_offset;
  options.workers = config.streams;
  options.route = config.route;

  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kernel_exponent_offset"] = config.kernel_offset;
  j["relative_tolerance"] = options.relative_tolerance;
  bool pass = true;
  auto list = ordered_json::array();
  for (int n : config.n) {
    const auto report = integral_eq::verify_integral_equation(
        n, config.samples, config.bins, config.seed, static_cast<std::uint64_t>(n), options);
    ctx.record.retries += report.retries;
    pass = pass && report.pass;
    list.push_back({{"N", report.n},
                    {"samples", report.samples},
                    {"l1_distance", report.l1_distance},
                    {"relative_l1", report.relative_l1},
                    {"sup_distance", report.sup_distance},
                    {"mc_error_budget", report.mc_error_budget},
                    {"pass", report.pass}});
    std::ostringstream overlay;
    write_overlay_csv(overlay, report.x, report.estimated, report.reference,
                      {"N=" + std::to_string(n) + " samples=" + std::to_string(config.samples) +
                           " bins=" + std::to_string(config.bins) +
                           " seed=" + std::to_string(config.seed),
                       "estimated=mixed empirical fixed-trace density reference=exact GUE density",
                       "kernel_exponent_offset=" + std::to_string(config.kernel_offset)});
    emit(ctx, "integral_eq_" + tag(n) + ".csv", overlay.str());
  }
  j["reports"] = list;
  j["pass"] = pass;
  const std::string text = j.dump(2) + "\n";
  emit(ctx, "integral_eq.json", text);
  ctx.out << text;
  return pass ? kExitPass : kExitFailure;
}

int run_semicircle(RunContext& ctx) {
  const auto& config = ctx.config;
  const auto report = integral_eq::semicircle_convergence_report(
      config.n, config.samples, config.bins, config.seed, config.streams, config.route);

  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["window"] = integral_eq::kSemicircleWindow;
  j["target_l1"] = integral_eq::kSemicircleTarget;
  auto list = ordered_json::array();
  for (const auto& row : report.rows) {
    ctx.record.retries += row.retries;
    list.push_back({{"N", row.n},
                    {"samples", row.samples},
                    {"l1_distance", row.l1_distance},
                    {"sup_distance", row.sup_distance},
                    {"error_bar", row.error_bar},
                    {"mass_before_renormalization", row.mass_before_renormalization}});
    std::ostringstream overlay;
    write_overlay_csv(overlay, row.x, row.estimated, row.reference,
                      {"N=" + std::to_string(row.n) + " samples=" + std::to_string(row.samples) +
                           " bins=" + std::to_string(config.bins) +
                           " seed=" + std::to_string(config.seed),
                       "estimated=rho_v renormalized to mass 1 reference=semicircle bin average",
                       "l1_distance=" + format_number(row.l1_distance) +
                           " window=" + format_number(integral_eq::kSemicircleWindow)});
    emit(ctx, "semicircle_" + tag(row.n) + ".csv", overlay.str());
  }
  j["rows"] = list;
  j["monotone"] = report.monotone;
  j["pass"] = report.pass;
  const std::string text = j.dump(2) + "\n";
  emit(ctx, "semicircle_report.json", text);
  ctx.out << text;
  return report.pass ? kExitPass : kExitFailure;
}

int verify_existing_manifest(const std::filesystem::path& path, std::ostream& out) {
  const auto problems = manifest::verify(path);
  for (const auto& p : problems) out << "mismatch " << p << "\n";
  out << "manifest " << path.string() << (problems.empty() ? ": all digests match" : ": FAILED")
      << "\n";
  return problems.empty() ? kExitPass : kExitFailure;
}

// Compares freshly written outputs against a manifest from an earlier run.
int compare_with_manifest(const manifest::RunManifest& fresh, const std::filesystem::path& path,
                          std::ostream& out) {
  const auto reference = manifest::load(path);
  std::map<std::string, std::string> expected;
  for (const auto& o : reference.outputs) expected[o.path] = o.sha256;
  bool ok = expected.size() == fresh.outputs.size();
  for (const auto& o : fresh.outputs) {
    const auto it = expected.find(o.path);
    if (it == expected.end()) {
      out << "mismatch " << o.path << ": not in " << path.string() << "\n";
      ok = false;
    } else if (it->second != o.sha256) {
      out << "mismatch " << o.path << ": digest " << o.sha256 << " != " << it->second << "\n";
      ok = false;
    }
  }
  out << "manifest " << path.string() << (ok ? ": reproduced" : ": FAILED") << "\n";
  return ok ? kExitPass : kExitFailure;
}

}  // namespace

std::string_view to_string(Command command) {
  for (const auto& [c, name] : kCommandNames) {
    if (c == command) return name;
  }
  return "unknown";
}

Command parse_command(std::string_view text) {
  for (const auto& [c, name] : kCommandNames) {
    if (name == text) return c;
  }
  throw UsageError("unknown command '" + std::string(text) + "'");
}

CliConfig defaults_for(Command command) {
  CliConfig config;
  config.command = command;
  switch (command) {
    case Command::density:
      config.n = {10};
      config.samples = 10'000;
      config.bins = 200;
      break;
    case Command::verify_selberg:
      config.n = {};
      config.samples = selberg::SuiteOptions{}.mc_samples;
      break;
    case Command::verify_integral_eq:
      config.n = {2, 4, 8};
      config.samples = 200'000;
      config.bins = 200;
      break;
    case Command::semicircle_report:
      config.n = {10, 50, 100};
      config.samples = 20'000;
      config.bins = 220;
      break;
    case Command::ratio:
      config.n = {2, 10};
      config.samples = 10'000;
      break;
    case Command::sample:
      config.n = {4};
      config.samples = 10;
      break;
  }
  return config;
}

CliConfig parse_arguments(const std::vector<std::string>& args,
                          const std::optional<std::string>& env_seed) {
  CLI::App app{"Fixed trace ensemble: sampling, densities and verification suites", "fixtrace"};
  app.require_subcommand(0, 1);

  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  const std::map<std::string_view, std::string> help{
      {"N", "matrix size, or a comma separated list"},
      {"samples", "number of Monte Carlo samples per N"},
      {"bins", "histogram bins"},
      {"seed", "64-bit master seed (SPHERICAL_RMT_SEED overrides)"},
      {"streams", "parallel sampling streams; results do not depend on it"},
      {"out-dir", "directory for outputs and the manifest"},
      {"format", "csv or json for density, sample and ratio outputs"},
      {"ensemble", "fixed_trace or gue"},
      {"route", "dense or tridiagonal eigenvalue sampler"},
      {"kernel-offset", "shift of the radial kernel exponent (negative controls)"}};
  for (auto key : kKeys) {
    const std::string k(key);
    flag_values[k];
    flag_options[k] = app.add_option("--" + k, flag_values[k], help.at(key))->type_name(
        k == "N" ? "INT[,INT...]" : k == "out-dir" ? "PATH" : "VALUE");
  }
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; flags override its entries")
      ->type_name("PATH");
  std::string verify_path;
  app.add_option("--verify-manifest", verify_path,
                 "check output digests against a manifest (alone: files on disk; with a "
                 "command: the fresh outputs)")
      ->type_name("PATH");

  std::map<std::string, CLI::App*> subcommands;
  for (const auto& [c, name] : kCommandNames) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->fallthrough();
    subcommands[std::string(name)] = sub;
  }
  subcommands["density"]->description("histogram density of the eigenvalues");
  subcommands["verify-selberg"]->description("closed forms against numerical oracles");
  subcommands["verify-integral-eq"]->description("radial mixing of the sphere density vs GUE");
  subcommands["semicircle-report"]->description("scaled densities against the semicircle");
  subcommands["ratio"]->description("<max x^2> / <x_1^2> on the sphere");
  subcommands["sample"]->description("raw spectra");

  std::vector<std::string> argv_storage{"fixtrace"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto& [name, sub] : subcommands) {
      if (sub->parsed()) target = sub;
    }
    throw HelpRequested(target->help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliConfig config;
  for (const auto& [name, sub] : subcommands) {
    if (sub->parsed()) config = defaults_for(parse_command(name));
  }
  if (!config.command && verify_path.empty()) {
    throw UsageError("a command or --verify-manifest is required (see --help)");
  }

  if (!config_path.empty()) {
    for (const auto& [key, value] : read_config_file(config_path)) {
      if (flag_options.at(key)->count() == 0) apply_value(config, key, value);
    }
  }
  for (auto key : kKeys) {
    const std::string k(key);
    if (flag_options.at(k)->count() > 0) apply_value(config, k, flag_values.at(k));
  }
  if (env_seed && !env_seed->empty()) {
    try {
      config.seed = parse_integer<std::uint64_t>("seed", trim(*env_seed));
    } catch (const UsageError&) {
      throw UsageError(std::string(kSeedEnvironmentVariable) + ": not an integer: '" +
                       *env_seed + "'");
    }
  }
  if (!verify_path.empty()) config.verify_manifest = verify_path;
  return config;
}

int run(const CliConfig& config, std::ostream& out) {
  if (!config.command) return verify_existing_manifest(*config.verify_manifest, out);

  const Command command = *config.command;
  std::filesystem::create_directories(config.out_dir);

  RunContext ctx{config, {}, out};
  ctx.record.command = std::string(to_string(command));
  ctx.record.master_seed = config.seed;
  ctx.record.n = config.n;
  ctx.record.num_samples = config.samples;
  ctx.record.num_streams = config.streams;
  ctx.record.bin_count = config.bins;
  ctx.record.sampling_route = std::string(sampler::to_string(config.route));

  int status = kExitPass;
  switch (command) {
    case Command::density:
      status = run_density(ctx);
      break;
    case Command::verify_selberg:
      status = run_verify_selberg(ctx);
      break;
    case Command::verify_integral_eq:
      status = run_verify_integral_eq(ctx);
      break;
    case Command::semicircle_report:
      status = run_semicircle(ctx);
      break;
    case Command::ratio:
      status = run_ratio(ctx);
      break;
    case Command::sample:
      status = run_sample(ctx);
      break;
  }

  const auto manifest_path = config.out_dir / ("manifest_" + file_stem(command) + ".json");
  if (config.verify_manifest) {
    const int check = compare_with_manifest(ctx.record, *config.verify_manifest, out);
    if (check != kExitPass) status = check;
  }
  // Written last so that a manifest passed to --verify-manifest may live at
  // the same path.
  manifest::save(ctx.record, manifest_path);
  return status;
}

int main_entry(const std::vector<std::string>& args, const std::optional<std::string>& env_seed,
               std::ostream& out, std::ostream& err) {
  CliConfig config;
  try {
    config = parse_arguments(args, env_seed);
  } catch (const HelpRequested& help) {
    out << help.text;
    return kExitPass;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    return run(config, out);
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace fixtrace::cli
