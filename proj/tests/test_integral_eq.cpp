#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fixtrace/errors.hpp"
#include "fixtrace/gue.hpp"
#include "fixtrace/integral_eq.hpp"

using namespace fixtrace;
using namespace fixtrace::integral_eq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smooth sigma_v with mass N: N * (15/16) (1 - y^2)^2 on [-1, 1].
DensityGrid bump(int n, std::size_t count = 2001) {
  std::vector<double> y(count);
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    y[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
    v[i] = n * 15.0 / 16.0 * std::pow(1.0 - y[i] * y[i], 2);
  }
  return DensityGrid(std::move(y), std::move(v), n, 1e-5, "bump", n);
}

DensityGrid uniform(int n) { return DensityGrid({-1.0, 1.0}, {n / 2.0, n / 2.0}, n, 1e-12, "uniform", n); }

// Gamma(a) / Gamma(b) from boost.
double boost_gamma_ratio(double a, double b) {
  return std::exp(boost::math::lgamma(a) - boost::math::lgamma(b));
}

}  // namespace

TEST_SUITE("integral_eq") {

TEST_CASE("radial weight") {
  const auto w = RadialWeight::for_levels(4);
  CHECK(w.exponent == 14.0);
  CHECK(w.shape == 7.5);
  CHECK(w.mode() == doctest::Approx(std::sqrt(7.0)));
  // Normalized: integral over (0, inf) of the density is 1.
  const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double r) { return r > 0.0 ? std::exp(w.log_density(r)) : 0.0; }, 0.0, 20.0, 10, 1e-14);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const auto shifted = RadialWeight::for_levels(4, -1);
  CHECK(shifted.exponent == 13.0);
}

TEST_CASE("radial mass") {
  for (int n : {2, 5, 10, 20, 100}) {
    const auto w = RadialWeight::for_levels(n);
    CHECK(radial_mass(w, 0.0, kInf) == doctest::Approx(1.0).epsilon(1e-15));
    const double a = 0.7 * w.mode();
    const double b = 1.1 * w.mode();
    // Direct oracle: P(shape, b^2) - P(shape, a^2) by boost.
    const double expected = boost::math::gamma_p(w.shape, b * b) - boost::math::gamma_p(w.shape, a * a);
    CHECK(radial_mass(w, a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(radial_mass(w, a, b) + radial_mass_outside(w, a, b) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto w10 = RadialWeight::for_levels(10);
  const double center10 = 10.0 / std::sqrt(2.0);
  CHECK(radial_mass(w10, center10 - 5.0, center10 + 5.0) >= 1.0 - 1e-12);

  const int n = 20;
  const auto w20 = RadialWeight::for_levels(n);
  const double center = n / std::sqrt(2.0);
  const double half = std::pow(n, 0.6);
  const double outside = radial_mass_outside(w20, center - half, center + half);
  // Independent tail oracle from boost: P(s, a^2) + Q(s, b^2).
  const double oracle = boost::math::gamma_p(w20.shape, std::pow(center - half, 2)) +
                        boost::math::gamma_q(w20.shape, std::pow(center + half, 2));
  CHECK(outside == doctest::Approx(oracle).epsilon(1e-9));
  for (int m = 1; m <= 10; ++m) CHECK(outside <= std::pow(10.0, -m));
}

TEST_CASE("quadrature window holds all but 1e-12 of the kernel for N >= 5") {
  for (int n = 5; n <= 100; n += 5) {
    const auto w = RadialWeight::for_levels(n);
    CHECK(radial_mass_outside(w, std::max(0.0, w.mode() - 8.0), w.mode() + 8.0) <= 1e-12);
  }
}

TEST_CASE("kernel constant fixed two ways") {
  for (int n : {2, 3, 4, 8, 10, 25, 50, 100}) {
    const double from_mass = log_kernel_constant_from_mass(n);
    CHECK(std::abs(from_mass - (std::log(2.0) - boost::math::lgamma(n * n / 2.0))) <=
          1e-12 * std::max(1.0, std::abs(from_mass)));
    CHECK(std::abs(log_kernel_constant_from_ball(n) - from_mass) <=
          1e-10 * std::max(1.0, std::abs(from_mass)));
  }
  CHECK(log_radial_normalizer(4) == doctest::Approx(std::log(boost::math::tgamma(8.0) / 2.0)));
}

TEST_CASE("uniform input has a closed-form image") {
  for (int n : {2, 3, 5, 8}) {
    const double s = (n * n - 1) / 2.0;
    const double factor = boost_gamma_ratio(s, n * n / 2.0);
    ForwardOptions options;
    for (double x = -6.0; x <= 6.0; x += 0.173) options.output_grid.push_back(x);
    const auto out = apply_forward_operator(n, uniform(n), options);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = out.points()[i];
      const double expected = n / 2.0 * factor * boost::math::gamma_q(s, x * x);
      INFO("N=", n, " x=", x);
      CHECK(std::abs(out.values()[i] - expected) <= 1e-8);
    }
  }
}

TEST_CASE("x = 0 identity") {
  for (int n : {2, 4, 10, 30}) {
    ForwardOptions options;
    options.output_grid = {-1.0, 0.0, 1.0};
    const auto sigma_v = bump(n);
    const auto out = apply_forward_operator(n, sigma_v, options);
    const double expected = sigma_v(0.0) * boost_gamma_ratio((n * n - 1) / 2.0, n * n / 2.0);
    CHECK(std::abs(out.values()[1] - expected) <= 1e-8 * std::max(1.0, expected));
  }
}

TEST_CASE("linearity, positivity and mass preservation") {
  const int n = 6;
  const auto f = bump(n);
  const auto g = uniform(n);
  // h = 0.25 f + 0.75 g on f's grid (mass N).
  std::vector<double> hv(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) hv[i] = 0.25 * f.values()[i] + 0.75 * g(f.points()[i]);
  const DensityGrid h(f.points(), hv, n, 1e-5, "mix", n);
  const auto of = apply_forward_operator(n, f);
  const auto og = apply_forward_operator(n, g);
  const auto oh = apply_forward_operator(n, h);
  for (std::size_t i = 0; i < oh.size(); ++i) {
    CHECK(std::abs(oh.values()[i] - (0.25 * of.values()[i] + 0.75 * og.values()[i])) <= 1e-10);
    CHECK(oh.values()[i] >= 0.0);
  }
  for (int m : {2, 3, 10, 40}) {
    for (const auto& input : {bump(m), uniform(m)}) {
      const auto out = apply_forward_operator(m, input);
      CHECK(std::abs(out.trapezoid_mass() - m) / m <= 1e-3);
    }
  }
}

TEST_CASE("an input that is not sigma_v maps away from the GUE density") {
  const auto out = apply_forward_operator(4, bump(4));
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    const double x = out.points()[i];
    l1 += std::abs(out.values()[i] - gue::gue_level_density(4, x)) *
          (out.points()[i + 1] - x);
  }
  CHECK(l1 > 0.05);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(apply_forward_operator(1, uniform(1)), DomainError);
  // Mass 2 declared for N = 3.
  CHECK_THROWS_AS(apply_forward_operator(3, uniform(2)), DomainError);
  // Support beyond [-1, 1].
  const DensityGrid wide({-2.0, 2.0}, {0.5, 0.5}, 2.0, 1e-12, "wide", 2);
  CHECK_THROWS_AS(apply_forward_operator(2, wide), DomainError);
  CHECK_THROWS_AS(verify_integral_equation(1, 100, 50, 1, 1), DomainError);
}

TEST_CASE("integral equation against Monte Carlo, reduced sample count") {
  const auto report = verify_integral_equation(4, 50'000, 200, 17, 4);
  INFO("rel L1=", report.relative_l1, " budget=", report.mc_error_budget);
  CHECK(report.pass);
  CHECK(report.relative_l1 <= 0.02);
  CHECK(report.x.size() == report.estimated.size());
  CHECK(report.x.size() == report.reference.size());
}

TEST_CASE("sigma_v(0) two ways") {
  const auto one = sigma_v_zero(1, SigmaZeroMode::exact_relation);
  CHECK(one.degenerate);
  CHECK(one.value == 0.0);
  CHECK(sigma_v_zero(1, SigmaZeroMode::asymptotic).degenerate);
  double previous_gap = 1.0;
  for (int n : {5, 10, 20, 40}) {
    const double exact = sigma_v_zero(n, SigmaZeroMode::exact_relation).value;
    const double asym = sigma_v_zero(n, SigmaZeroMode::asymptotic).value;
    // Definitions, with the gamma ratio taken from boost.
    CHECK(exact == doctest::Approx(gue::gue_level_density(n, 0.0) *
                                   boost_gamma_ratio(n * n / 2.0, (n * n - 1) / 2.0))
                       .epsilon(1e-12));
    CHECK(asym == doctest::Approx(std::sqrt(2.0 * n) / std::numbers::pi *
                                  boost_gamma_ratio(n * n / 2.0, (n * n - 1) / 2.0))
                      .epsilon(1e-12));
    const double gap = std::abs(exact / asym - 1.0);
    if (n == 20) CHECK(gap <= 0.05);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

}  // TEST_SUITE
