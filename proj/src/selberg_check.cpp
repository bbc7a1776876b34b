#include "fixtrace/selberg_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtrace/density_grid.hpp"
#include "fixtrace/errors.hpp"
#include "fixtrace/quadrature.hpp"
#include "fixtrace/sampler.hpp"

namespace fixtrace::selberg {

namespace {

// Quintic smoothstep t = u^3 (10 - 15u + 6u^2) and its derivative.
double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_derivative(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

struct UnitRule {
  std::vector<double> t;
  std::vector<double> weight;
};

UnitRule unit_rule(std::size_t nodes, NodeMap map) {
  const quadrature::GaussLegendre rule(nodes);
  UnitRule unit;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double u = 0.5 * (rule.nodes()[i] + 1.0);
    const bool smooth = map == NodeMap::smoothstep;
    unit.t.push_back(smooth ? smoothstep(u) : u);
    unit.weight.push_back(0.5 * rule.weights()[i] * (smooth ? smoothstep_derivative(u) : 1.0));
  }
  return unit;
}

double vandermonde_abs(std::span<const double> x) {
  double product = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) product *= std::abs(x[j] - x[i]);
  }
  return product;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Elementary symmetric polynomial e_m(x).
double elementary_symmetric(std::span<const double> x, int m) {
  std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
  e[0] = 1.0;
  for (double v : x) {
    for (int k = m; k >= 1; --k) e[k] += v * e[k - 1];
  }
  return e[m];
}

double beta_by_quadrature(double alpha, double beta) {
  return ordered_region_integral(1, 0.0, 1.0, 64, [&](std::span<const double> x) {
    return std::pow(x[0], alpha - 1.0) * std::pow(1.0 - x[0], beta - 1.0);
  });
}

std::string describe(std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, value] : fields) {
    if (!first) out << ", ";
    out << name << "=" << format_number(value);
    first = false;
  }
  return out.str();
}

}  // namespace

double ordered_region_integral(int n, double lo, double hi, std::size_t nodes,
                               const std::function<double(std::span<const double>)>& f,
                               NodeMap map) {
  if (n < 1) throw DomainError("ordered_region_integral: n must be positive");
  const UnitRule rule = unit_rule(nodes, map);
  std::vector<double> x(static_cast<std::size_t>(n));
  double total = 0.0;
  std::function<void(int, double, double)> recurse = [&](int depth, double lower,
                                                         double weight) {
    if (depth == n) {
      total += weight * f(x);
      return;
    }
    const double width = hi - lower;
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
      x[depth] = lower + width * rule.t[i];
      recurse(depth + 1, x[depth], weight * width * rule.weight[i]);
    }
  };
  recurse(0, lo, 1.0);
  return total;
}

double selberg_quadrature_oracle(const SelbergParams& p, int moment_m, std::size_t nodes) {
  p.validate();
  if (moment_m < 0 || moment_m > p.n) throw DomainError("selberg oracle: moment out of range");
  const double normalizer = moment_m > 0 ? binomial(p.n, moment_m) : 1.0;
  const double ordered = ordered_region_integral(p.n, 0.0, 1.0, nodes, [&](std::span<const double> x) {
    double value = std::pow(vandermonde_abs(x), 2.0 * p.gamma);
    for (double v : x) value *= std::pow(v, p.alpha - 1.0) * std::pow(1.0 - v, p.beta - 1.0);
    if (moment_m > 0) value *= elementary_symmetric(x, moment_m) / normalizer;
    return value;
  });
  return factorial(p.n) * ordered;
}

Estimate selberg_monte_carlo_oracle(const SelbergParams& p, std::size_t samples,
                                    std::uint64_t seed) {
  p.validate();
  const double log_proposal_norm = p.n * std::log(beta_by_quadrature(p.alpha, p.beta));
  sampler::Engine engine(seed);
  std::gamma_distribution<double> ga(p.alpha, 1.0);
  std::gamma_distribution<double> gb(p.beta, 1.0);
  std::vector<double> x(static_cast<std::size_t>(p.n));
  double sum = 0.0;
  double sum_squares = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) {
      const double a = ga(engine);
      const double b = gb(engine);
      v = a / (a + b);
    }
    const double w = std::pow(vandermonde_abs(x), 2.0 * p.gamma);
    sum += w;
    sum_squares += w * w;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double variance = std::max(0.0, (sum_squares - count * mean * mean) / (count - 1.0));
  const double scale = std::exp(log_proposal_norm);
  return {scale * mean, scale * std::sqrt(variance / count)};
}

double gaussian_selberg_quadrature_oracle(int n, double gamma, double a, std::size_t nodes) {
  if (!(a > 0.0)) throw DomainError("gaussian oracle: a must be positive");
  const double half_width = 9.0 / std::sqrt(a);
  const double ordered =
      ordered_region_integral(n, -half_width, half_width, nodes, [&](std::span<const double> x) {
        double sum_squares = 0.0;
        for (double v : x) sum_squares += v * v;
        return std::pow(vandermonde_abs(x), 2.0 * gamma) * std::exp(-a * sum_squares);
      },
      NodeMap::identity);
  return factorial(n) * ordered;
}

Estimate gaussian_selberg_monte_carlo_oracle(int n, double gamma, double a, std::size_t samples,
                                             std::uint64_t seed) {
  if (!(a > 0.0)) throw DomainError("gaussian oracle: a must be positive");
  sampler::Engine engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 / a));
  std::vector<double> x(static_cast<std::size_t>(n));
  double sum = 0.0;
  double sum_squares = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) v = normal(engine);
    const double w = std::pow(vandermonde_abs(x), 2.0 * gamma);
    sum += w;
    sum_squares += w * w;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double variance = std::max(0.0, (sum_squares - count * mean * mean) / (count - 1.0));
  const double scale = std::pow(std::numbers::pi / a, 0.5 * n);
  return {scale * mean, scale * std::sqrt(variance / count)};
}

double ball_vandermonde_polar_oracle(double radius) {
  // (x - y)^2 = r^2 (1 - sin 2 theta); r^3 dr integrated exactly by GL.
  const quadrature::GaussLegendre rule(16);
  const double radial = rule.integrate([](double r) { return r * r * r; }, 0.0, radius);
  const double angular = rule.integrate_composite(
      [](double t) { return 1.0 - std::sin(2.0 * t); }, 0.0, 2.0 * std::numbers::pi, 8);
  return radial * angular;
}

Estimate ball_vandermonde_monte_carlo_oracle(int n, double radius, std::size_t samples,
                                             std::uint64_t seed) {
  sampler::Engine engine(seed);
  std::uniform_real_distribution<double> uniform(-radius, radius);
  std::vector<double> x(static_cast<std::size_t>(n));
  const double radius_squared = radius * radius;
  double sum = 0.0;
  double sum_squares = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double norm_squared = 0.0;
    for (double& v : x) {
      v = uniform(engine);
      norm_squared += v * v;
    }
    if (norm_squared > radius_squared) continue;
    const double d = vandermonde_abs(x);
    sum += d * d;
    sum_squares += d * d * d * d;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double variance = std::max(0.0, (sum_squares - count * mean * mean) / (count - 1.0));
  const double volume = std::pow(2.0 * radius, n);
  return {volume * mean, volume * std::sqrt(variance / count)};
}

double generalized_ball_quadrature_oracle(int n, double gamma, double beta) {
  const double exponent = beta - homogeneity_exponent(n, gamma) - 1.0;
  if (!(exponent > -1.0)) throw DomainError("generalized ball oracle: not integrable");
  if (n == 1) {
    return ordered_region_integral(1, -1.0, 1.0, 64, [&](std::span<const double> y) {
      return std::pow(1.0 - y[0] * y[0], exponent);
    });
  }
  if (n != 2) throw DomainError("generalized ball oracle: only n = 1, 2 supported");
  // y = r (cos t, sin t): |y1 - y2|^{2 gamma} = r^{2 gamma} |cos t - sin t|^{2 gamma},
  // which vanishes at t = pi/4 and 5 pi/4; split the angular range there.
  const double radial = ordered_region_integral(1, 0.0, 1.0, 64, [&](std::span<const double> r) {
    return std::pow(r[0], 2.0 * gamma + 1.0) * std::pow(1.0 - r[0] * r[0], exponent);
  });
  auto angular_piece = [&](double lo) {
    return ordered_region_integral(1, lo, lo + std::numbers::pi, 64, [&](std::span<const double> t) {
      return std::pow(std::abs(std::cos(t[0]) - std::sin(t[0])), 2.0 * gamma);
    });
  };
  const double angular =
      angular_piece(0.25 * std::numbers::pi) + angular_piece(1.25 * std::numbers::pi);
  return radial * angular;
}

double cauchy_selberg_mixture_oracle(int n, double gamma, double beta) {
  const double k = homogeneity_exponent(n, gamma);
  if (!(beta > k)) throw DomainError("cauchy mixture oracle: beta too small");
  // int (1 + |x|^2)^{-beta} F(x) dx = (1/Gamma(beta)) int a^{beta-1} e^{-a} int e^{-a|x|^2} F dx da.
  const double upper = 80.0 + 4.0 * beta;
  auto mixture = [&](double power, bool with_gaussian) {
    return ordered_region_integral(1, 0.0, upper, 128, [&](std::span<const double> a) {
      const double base = std::exp((power - 1.0) * std::log(a[0]) - a[0]);
      return with_gaussian ? base * gaussian_selberg(n, gamma, a[0]).value() : base;
    });
  };
  return mixture(beta, true) / mixture(beta, false);
}

std::string_view to_string(OracleMethod method) {
  return method == OracleMethod::quadrature ? "quadrature" : "monte_carlo";
}

std::vector<SelbergParams> selberg_quadrature_parameter_sets() {
  return {
      {1, 1.0, 1.0, 0.0},  {1, 2.0, 3.0, 0.7},  {1, 2.5, 1.5, 1.0},  {2, 1.0, 1.0, 1.0},
      {2, 2.0, 1.0, 0.5},  {2, 1.5, 2.5, 1.0},  {2, 3.0, 2.0, 1.5},  {2, 2.0, 2.0, 2.0},
      {2, 1.0, 1.0, 0.0},  {2, 2.5, 3.5, 0.5},  {2, 1.5, 1.5, 0.3},  {3, 2.0, 1.0, 0.5},
      {3, 1.0, 1.0, 1.0},  {3, 2.0, 2.0, 1.0},  {3, 1.5, 2.0, 0.5},  {3, 3.0, 3.0, 1.5},
      {3, 2.5, 1.5, 1.0},  {3, 1.0, 2.0, 2.0},  {3, 2.0, 3.0, 0.5},  {3, 1.0, 1.0, 0.5},
  };
}

namespace {

IdentityCheck quadrature_row(std::string identity, std::string parameters, LogValue closed,
                             double oracle, double tolerance) {
  IdentityCheck row;
  row.identity = std::move(identity);
  row.parameters = std::move(parameters);
  row.closed_form_log = closed.log;
  row.closed_form = closed.value();
  row.oracle = oracle;
  row.relative_error = std::abs(row.closed_form - oracle) / std::abs(oracle);
  row.method = OracleMethod::quadrature;
  row.pass = row.relative_error <= tolerance;
  return row;
}

IdentityCheck monte_carlo_row(std::string identity, std::string parameters, LogValue closed,
                              Estimate oracle, double sigmas) {
  IdentityCheck row;
  row.identity = std::move(identity);
  row.parameters = std::move(parameters);
  row.closed_form_log = closed.log;
  row.closed_form = closed.value();
  row.oracle = oracle.value;
  row.oracle_std_error = oracle.std_error;
  row.relative_error = std::abs(row.closed_form - oracle.value) / std::abs(oracle.value);
  row.method = OracleMethod::monte_carlo;
  row.pass = std::abs(row.closed_form - oracle.value) <= sigmas * oracle.std_error;
  return row;
}

std::string describe(const SelbergParams& p) {
  return describe({{"n", p.n}, {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}});
}

}  // namespace

std::vector<IdentityCheck> run_selberg_suite(const SuiteOptions& options) {
  std::vector<IdentityCheck> rows;
  const double tol = options.quadrature_tolerance;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return sampler::derive_seed(options.seed, {0x5e1b, stream++}); };

  for (const auto& p : selberg_quadrature_parameter_sets()) {
    rows.push_back(quadrature_row("selberg_integral", describe(p), selberg_integral(p),
                                  selberg_quadrature_oracle(p), tol));
  }

  const std::vector<std::pair<SelbergParams, int>> moments = {
      {{1, 1.0, 1.0, 0.0}, 1}, {{2, 1.0, 1.0, 1.0}, 1}, {{2, 1.0, 1.0, 1.0}, 2},
      {{3, 2.0, 1.0, 0.5}, 2}, {{3, 1.5, 2.5, 1.0}, 3}};
  for (const auto& [p, m] : moments) {
    const double ratio = aomoto_moment(p, m);
    const double oracle = selberg_quadrature_oracle(p, m) / selberg_quadrature_oracle(p);
    rows.push_back(quadrature_row("aomoto_moment", describe(p) + ", m=" + std::to_string(m),
                                  {std::log(ratio), 1}, oracle, tol));
  }

  for (const SelbergParams& p : {SelbergParams{4, 2.0, 2.0, 0.5}, SelbergParams{5, 2.0, 1.5, 0.25},
                                 SelbergParams{6, 1.5, 1.5, 0.25}}) {
    rows.push_back(monte_carlo_row(
        "selberg_integral", describe(p), selberg_integral(p),
        selberg_monte_carlo_oracle(p, options.mc_samples, next_seed()), options.mc_sigmas));
  }

  for (const auto& [n, gamma, a] : {std::tuple{1, 1.0, 1.7}, std::tuple{2, 1.0, 1.0},
                                    std::tuple{2, 0.5, 2.0}, std::tuple{3, 1.0, 0.5}}) {
    rows.push_back(quadrature_row("gaussian_selberg", describe({{"n", n}, {"gamma", gamma}, {"a", a}}),
                                  gaussian_selberg(n, gamma, a),
                                  gaussian_selberg_quadrature_oracle(n, gamma, a), tol));
  }
  rows.push_back(monte_carlo_row(
      "gaussian_selberg", describe({{"n", 3}, {"gamma", 1.0}, {"a", 1.0}}),
      gaussian_selberg(3, 1.0, 1.0),
      gaussian_selberg_monte_carlo_oracle(3, 1.0, 1.0, options.mc_samples, next_seed()),
      options.mc_sigmas));

  for (double radius : {1.0, 3.0}) {
    rows.push_back(quadrature_row("ball_vandermonde_integral",
                                  describe({{"n", 2}, {"R", radius}}),
                                  ball_vandermonde_integral(2, radius),
                                  ball_vandermonde_polar_oracle(radius), std::min(tol, 1e-10)));
  }
  rows.push_back(monte_carlo_row(
      "ball_vandermonde_integral", describe({{"n", 3}, {"R", 1.0}}),
      ball_vandermonde_integral(3, 1.0),
      ball_vandermonde_monte_carlo_oracle(3, 1.0, options.ball_mc_samples, next_seed()),
      options.mc_sigmas));

  for (const auto& [n, gamma, beta] : {std::tuple{1, 0.5, 2.5}, std::tuple{1, 2.0, 3.25},
                                       std::tuple{2, 1.0, 5.0}, std::tuple{2, 0.5, 3.0}}) {
    rows.push_back(quadrature_row("generalized_ball_integral",
                                  describe({{"n", n}, {"gamma", gamma}, {"beta", beta}}),
                                  generalized_ball_integral(n, gamma, beta),
                                  generalized_ball_quadrature_oracle(n, gamma, beta), tol));
  }

  for (const auto& [n, gamma, beta] : {std::tuple{2, 1.0, 4.0}, std::tuple{3, 0.5, 5.0}}) {
    rows.push_back(quadrature_row("cauchy_selberg_integral",
                                  describe({{"n", n}, {"gamma", gamma}, {"beta", beta}}),
                                  cauchy_selberg_integral(n, gamma, beta),
                                  cauchy_selberg_mixture_oracle(n, gamma, beta), tol));
  }
  return rows;
}

}  // namespace fixtrace::selberg
