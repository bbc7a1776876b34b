#include "fixtrace/integral_eq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fixtrace/errors.hpp"
#include "fixtrace/gue.hpp"
#include "fixtrace/quadrature.hpp"
#include "fixtrace/selberg.hpp"
#include "fixtrace/specfun.hpp"

namespace fixtrace::integral_eq {

using specfun::log_gamma;
using specfun::regularized_lower_gamma;
using specfun::regularized_upper_gamma;

RadialWeight RadialWeight::for_levels(int n, int exponent_offset) {
  if (n < 2) throw DomainError("RadialWeight: N must be at least 2");
  RadialWeight w;
  w.n = n;
  w.exponent = static_cast<double>(n) * n - 2.0 + exponent_offset;
  if (!(w.exponent > -1.0)) throw DomainError("RadialWeight: weight not integrable at 0");
  w.shape = 0.5 * (w.exponent + 1.0);
  w.log_norm = log_gamma(w.shape) - std::numbers::ln2;
  return w;
}

double RadialWeight::mode() const { return std::sqrt(std::max(0.0, 0.5 * exponent)); }

double RadialWeight::log_density(double r) const {
  if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
  return -r * r + exponent * std::log(r) - log_norm;
}

namespace {

void require_window(double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) {
    throw DomainError("radial_mass: need 0 <= a <= b");
  }
}

}  // namespace

double radial_mass(const RadialWeight& w, double a, double b) {
  require_window(a, b);
  const double ta = a * a;
  const double tb = std::isinf(b) ? b : b * b;
  // Difference of whichever tail functions are small, to keep precision.
  if (ta >= w.shape) return regularized_upper_gamma(w.shape, ta) - regularized_upper_gamma(w.shape, tb);
  return regularized_lower_gamma(w.shape, tb) - regularized_lower_gamma(w.shape, ta);
}

double radial_mass_outside(const RadialWeight& w, double a, double b) {
  require_window(a, b);
  const double tb = std::isinf(b) ? b : b * b;
  return regularized_lower_gamma(w.shape, a * a) + regularized_upper_gamma(w.shape, tb);
}

double log_radial_normalizer(int n) {
  if (n < 1) throw DomainError("radial normalizer: N must be positive");
  return log_gamma(0.5 * n * n) - std::numbers::ln2;
}

double log_kernel_constant_from_mass(int n) {
  // int exp(-r^2) r^{N^2-2} sigma_v(x/r) dr dx = N int exp(-r^2) r^{N^2-1} dr.
  return -log_radial_normalizer(n);
}

double log_kernel_constant_from_ball(int n) {
  // Integral of Delta^2 over the unit sphere is N^2 times the ball integral;
  // dividing by the Gaussian normalizer gives the radial prefactor.
  const auto ball = selberg::ball_vandermonde_integral(n, 1.0);
  const auto gaussian = selberg::gaussian_selberg(n, 1.0, 1.0);
  return 2.0 * std::log(static_cast<double>(n)) + ball.log - gaussian.log;
}

namespace {

void require_fixed_trace_input(int n, const DensityGrid& sigma_v) {
  if (n < 2) throw DomainError("apply_forward_operator: N must be at least 2");
  constexpr double slack = 1e-12;
  const auto& points = sigma_v.points();
  const auto& values = sigma_v.values();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(points[i]) > 1.0 + slack && values[i] != 0.0) {
      throw DomainError("apply_forward_operator: sigma_v must vanish outside [-1, 1]");
    }
  }
  const double mass = sigma_v.trapezoid_mass();
  if (std::abs(mass - n) > 1e-2 * n) {
    throw DomainError("apply_forward_operator: sigma_v mass " + format_number(mass) +
                      " is not N = " + std::to_string(n));
  }
}

std::vector<double> default_output_grid(const RadialWeight& w, const ForwardOptions& options) {
  const double half = w.mode() + options.window_half_width;
  const std::size_t count = std::max<std::size_t>(options.output_points, 3);
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

}  // namespace

DensityGrid apply_forward_operator(int n, const DensityGrid& sigma_v,
                                   const ForwardOptions& options) {
  require_fixed_trace_input(n, sigma_v);
  const RadialWeight w = RadialWeight::for_levels(n, options.exponent_offset);
  // Normalizing by int exp(-r^2) r^{exponent+1} makes the operator mass
  // preserving; for the true exponent this is exactly 2 / Gamma(N^2/2).
  const double scale = specfun::gamma_ratio(w.shape, w.shape + 0.5);

  const quadrature::GaussLegendre rule(options.nodes_per_panel);
  const double mode = w.mode();
  const double window_lo = std::max(0.0, mode - options.window_half_width);
  const double window_hi = mode + options.window_half_width;

  std::vector<double> points =
      options.output_grid.empty() ? default_output_grid(w, options) : options.output_grid;
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i];
    const double ax = std::abs(x);
    const double lo = std::max(ax, window_lo);
    double total = 0.0;
    if (window_hi > lo) {
      const auto panels = static_cast<std::size_t>(
          std::max(1.0, std::ceil((window_hi - lo) / options.panel_width)));
      total = rule.integrate_composite(
          [&](double r) {
            if (r <= 0.0) return 0.0;
            return std::exp(w.log_density(r)) * sigma_v(x / r);
          },
          lo, window_hi, panels);
      // Tails beyond the window carry at most ~1e-12 of the weight; add them
      // with sigma_v frozen at the window edge.
      if (lo > ax) total += radial_mass(w, ax, lo) * sigma_v(x / lo);
      total += radial_mass(w, window_hi, std::numeric_limits<double>::infinity()) *
               sigma_v(x / window_hi);
    } else if (ax > 0.0) {
      total = radial_mass(w, ax, std::numeric_limits<double>::infinity()) * sigma_v(x / ax);
    }
    values[i] = scale * total;
  }

  // A caller-supplied grid may be sparse or partial, so its trapezoid mass
  // is not checked.
  if (!options.output_grid.empty()) {
    return DensityGrid(std::move(points), std::move(values), n, DensityGrid::kUnchecked,
                       "forward_operator", n);
  }
  const double mass = trapezoid(points, values);
  if (std::abs(mass - n) > 1e-2 * n) {
    throw NumericalFailure("apply_forward_operator: output mass " + format_number(mass) +
                           " drifted from N = " + std::to_string(n));
  }
  return DensityGrid(std::move(points), std::move(values), n, 1e-2, "forward_operator", n);
}

IntegralEquationReport verify_integral_equation(int n, std::size_t num_samples, std::size_t bins,
                                                std::uint64_t master_seed, std::uint64_t stream,
                                                const VerificationOptions& options) {
  if (n < 2 || n > 50) throw DomainError("verify_integral_equation: N must lie in [2, 50]");
  sampler::SamplingPlan plan;
  plan.master_seed = master_seed;
  plan.stream = stream;
  plan.n = n;
  plan.num_samples = num_samples;
  plan.workers = options.workers;
  plan.ensemble = sampler::Ensemble::fixed_trace;
  plan.route = options.route;
  const auto batch = sampler::generate_spectra(plan);
  const auto histogram = sampler::estimate_density(batch.samples, bins, {-1.0, 1.0});

  ForwardOptions forward;
  forward.exponent_offset = options.exponent_offset;
  const DensityGrid mixed = apply_forward_operator(n, histogram.grid(), forward);

  IntegralEquationReport report;
  report.n = n;
  report.samples = num_samples;
  report.bins = bins;
  report.retries = batch.retries;
  report.x = mixed.points();
  report.estimated = mixed.values();
  report.reference.resize(report.x.size());
  std::vector<double> difference(report.x.size());
  for (std::size_t i = 0; i < report.x.size(); ++i) {
    report.reference[i] = gue::gue_level_density(n, report.x[i]);
    difference[i] = std::abs(report.estimated[i] - report.reference[i]);
    report.sup_distance = std::max(report.sup_distance, difference[i]);
  }
  report.l1_distance = trapezoid(report.x, difference);
  report.relative_l1 = report.l1_distance / n;
  // The operator is positive and mass preserving, so the integrated image of
  // the per-bin standard errors equals their binned total.
  report.mc_error_budget = histogram.error_budget();
  report.pass = report.l1_distance <= 3.0 * report.mc_error_budget &&
                report.relative_l1 <= options.relative_tolerance;
  return report;
}

SigmaZero sigma_v_zero(int n, SigmaZeroMode mode) {
  if (n < 1) throw DomainError("sigma_v_zero: N must be positive");
  if (n == 1) return {0.0, true};
  const double a = 0.5 * n * n;
  const double b = 0.5 * (static_cast<double>(n) * n - 1.0);
  const double ratio = specfun::gamma_ratio(a, b);
  if (mode == SigmaZeroMode::exact_relation) {
    return {gue::gue_level_density(n, 0.0) * ratio, false};
  }
  return {std::sqrt(2.0 * n) * ratio / std::numbers::pi, false};
}

namespace {

SemicircleRow semicircle_row(int n, std::size_t num_samples, std::size_t bins,
                             std::uint64_t master_seed, unsigned workers,
                             sampler::SamplingRoute route) {
  sampler::SamplingPlan plan;
  plan.master_seed = master_seed;
  plan.stream = static_cast<std::uint64_t>(n);
  plan.n = n;
  plan.num_samples = num_samples;
  plan.workers = workers;
  plan.ensemble = sampler::Ensemble::fixed_trace;
  plan.route = route;
  const auto batch = sampler::generate_spectra(plan);

  // Bin directly in the scaled variable x = sqrt(N) y / 2 so the resolution
  // does not shrink with the 2/sqrt(N) width of the spectrum.
  const double root_n = std::sqrt(static_cast<double>(n));
  constexpr double kHalfSpan = 1.1;
  const auto histogram = sampler::estimate_density_scaled(batch.samples, bins,
                                                          {-kHalfSpan, kHalfSpan},
                                                          0.5 * root_n, 0.05);
  // histogram(x) = sigma_v(2x/sqrt N) * 2/sqrt N, so
  // rho_v(x) = (2/N^{3/2}) sigma_v(2x/sqrt N) = histogram(x) / N.
  const double rho_factor = (2.0 / (n * root_n)) * (0.5 * root_n);

  SemicircleRow row;
  row.n = n;
  row.samples = num_samples;
  row.retries = batch.retries;
  row.mass_before_renormalization = histogram.binned_mass() * rho_factor;
  const double renormalize = rho_factor / row.mass_before_renormalization;
  for (std::size_t b = 0; b < histogram.bins; ++b) {
    const double lo = histogram.support.lo + b * histogram.bin_width;
    const double hi = lo + histogram.bin_width;
    const double estimate = histogram.values[b] * renormalize;
    const double reference = gue::semicircle_bin_average(lo, hi);
    row.x.push_back(histogram.center(b));
    row.estimated.push_back(estimate);
    row.reference.push_back(reference);
    constexpr double edge_slack = 1e-9;
    if (lo >= -kSemicircleWindow - edge_slack && hi <= kSemicircleWindow + edge_slack) {
      const double gap = std::abs(estimate - reference);
      row.l1_distance += gap * histogram.bin_width;
      row.sup_distance = std::max(row.sup_distance, gap);
      row.error_bar += histogram.std_errors[b] * renormalize * histogram.bin_width;
    }
  }
  return row;
}

}  // namespace

SemicircleReport semicircle_convergence_report(std::span<const int> ns, std::size_t num_samples,
                                               std::size_t bins, std::uint64_t master_seed,
                                               unsigned workers, sampler::SamplingRoute route) {
  std::vector<int> sorted(ns.begin(), ns.end());
  std::sort(sorted.begin(), sorted.end());
  for (int n : sorted) {
    if (n < 2) throw DomainError("semicircle_convergence_report: each N must be at least 2");
  }
  SemicircleReport report;
  for (int n : sorted) {
    report.rows.push_back(semicircle_row(n, num_samples, bins, master_seed, workers, route));
  }
  report.monotone = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const auto& prev = report.rows[k - 1];
    const auto& cur = report.rows[k];
    if (cur.l1_distance > prev.l1_distance + std::max(prev.error_bar, cur.error_bar)) {
      report.monotone = false;
    }
  }
  report.pass = report.monotone;
  for (const auto& row : report.rows) {
    if (row.n >= 100 && row.l1_distance > kSemicircleTarget) report.pass = false;
    if (row.n >= 10 && std::abs(row.mass_before_renormalization - 1.0) > 0.05) {
      report.pass = false;
    }
  }
  return report;
}

}  // namespace fixtrace::integral_eq
