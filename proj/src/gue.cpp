#include "fixtrace/gue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fixtrace/errors.hpp"
#include "fixtrace/quadrature.hpp"
#include "fixtrace/specfun.hpp"

namespace fixtrace::gue {

namespace {

void require_levels(int n) {
  if (n < 1 || n > kMaxLevels) {
    throw DomainError("gue: N must lie in [1, " + std::to_string(kMaxLevels) + "], got " +
                      std::to_string(n));
  }
}

const quadrature::GaussLegendre& bin_rule() {
  static const quadrature::GaussLegendre rule(16);
  return rule;
}

}  // namespace

double gue_level_density(int n, double x) {
  require_levels(n);
  return specfun::hermite_phi_square_sum(static_cast<std::size_t>(n), x);
}

double gue_bin_average(int n, double lo, double hi) {
  require_levels(n);
  if (!(hi > lo)) throw DomainError("gue_bin_average: empty interval");
  // Oscillations have wavelength ~ pi / sqrt(2N); keep panels well below it.
  const double wavelength = std::numbers::pi / std::sqrt(2.0 * n);
  const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / (0.25 * wavelength)));
  const double integral = bin_rule().integrate_composite(
      [n](double x) { return gue_level_density(n, x); }, lo, hi, std::max<std::size_t>(1, panels));
  return integral / (hi - lo);
}

double semicircle(double x, bool normalized) {
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double s = std::sqrt((1.0 - x) * (1.0 + x));
  return normalized ? (2.0 / std::numbers::pi) * s : s;
}

double semicircle_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + (x * std::sqrt((1.0 - x) * (1.0 + x)) + std::asin(x)) / std::numbers::pi;
}

double semicircle_bin_average(double lo, double hi) {
  if (!(hi > lo)) throw DomainError("semicircle_bin_average: empty interval");
  return (semicircle_cdf(hi) - semicircle_cdf(lo)) / (hi - lo);
}

DensityGrid tabulate_gue_density(int n, std::span<const double> points) {
  require_levels(n);
  std::vector<double> values(points.size());
  std::transform(points.begin(), points.end(), values.begin(),
                 [n](double x) { return gue_level_density(n, x); });
  return DensityGrid(std::vector<double>(points.begin(), points.end()), std::move(values), n,
                     DensityGrid::kDefaultTolerance, "gue_exact", n);
}

DensityGrid tabulate_gue_density(int n, std::size_t count) {
  require_levels(n);
  if (count < 2) throw DomainError("tabulate_gue_density: need at least two points");
  const double half_width = std::sqrt(2.0 * n) + 8.0;
  std::vector<double> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    points[i] = -half_width + 2.0 * half_width * static_cast<double>(i) /
                                  static_cast<double>(count - 1);
  }
  return tabulate_gue_density(n, points);
}

DensityGrid scale_gue_to_rho(int n, const DensityGrid& sigma) {
  require_levels(n);
  const double tolerance = DensityGrid::kDefaultTolerance;
  if (std::abs(sigma.mass() - n) > tolerance * n) {
    throw InconsistencyError("scale_gue_to_rho: input must declare mass N = " +
                             std::to_string(n));
  }
  const double stretch = std::sqrt(2.0 * n);
  const double prefactor = std::sqrt(2.0 / n);
  std::vector<double> points(sigma.points());
  std::vector<double> values(sigma.values());
  for (double& x : points) x /= stretch;
  for (double& v : values) v *= prefactor;
  const double mass = trapezoid(points, values);
  if (std::abs(mass - 1.0) > tolerance) {
    throw InconsistencyError("scale_gue_to_rho: rescaled mass " + format_number(mass) +
                             " is not 1");
  }
  return DensityGrid(std::move(points), std::move(values), 1.0, tolerance, "gue_rho", n);
}

}  // namespace fixtrace::gue
