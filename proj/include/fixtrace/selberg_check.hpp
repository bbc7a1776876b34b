#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fixtrace/estimate.hpp"
#include "fixtrace/selberg.hpp"

namespace fixtrace::selberg {

// Numerical oracles for the closed forms. Except for the mixture oracle,
// which checks one step of the ball-integral derivation on top of
// gaussian_selberg, they integrate the defining integrands directly and
// never evaluate a gamma product.

enum class NodeMap { identity, smoothstep };

// Integral of f over the ordered region lo < x_1 < ... < x_n < hi by nested
// Gauss-Legendre. With NodeMap::smoothstep each level is pre-composed with a
// quintic smoothstep map that flattens algebraic endpoint singularities.
double ordered_region_integral(int n, double lo, double hi, std::size_t nodes,
                               const std::function<double(std::span<const double>)>& f,
                               NodeMap map = NodeMap::smoothstep);

// Selberg integral (moment_m = 0) or the unnormalized Aomoto moment
// int x_1 ... x_m Phi, via the ordered region times n!.
double selberg_quadrature_oracle(const SelbergParams& p, int moment_m = 0,
                                 std::size_t nodes = 64);

// Importance sampling with independent Beta(alpha, beta) coordinates.
Estimate selberg_monte_carlo_oracle(const SelbergParams& p, std::size_t samples,
                                    std::uint64_t seed);

// Gaussian Selberg integral over R^n: nested quadrature for small n,
// importance sampling from N(0, 1/(2a)) otherwise.
double gaussian_selberg_quadrature_oracle(int n, double gamma, double a, std::size_t nodes = 64);
Estimate gaussian_selberg_monte_carlo_oracle(int n, double gamma, double a, std::size_t samples,
                                             std::uint64_t seed);

// Ball integral of Delta^2 in polar coordinates (n = 2) and by uniform
// sampling of the enclosing cube (any n).
double ball_vandermonde_polar_oracle(double radius);
Estimate ball_vandermonde_monte_carlo_oracle(int n, double radius, std::size_t samples,
                                             std::uint64_t seed);

// Generalized ball integral: n = 1 by direct quadrature on [-1, 1], n = 2 in
// polar coordinates over the unit disk.
double generalized_ball_quadrature_oracle(int n, double gamma, double beta);

// (1 + sum x^2)^{-beta} integral obtained by integrating the Gaussian
// Selberg integral against a^{beta-1} e^{-a} / Gamma(beta) over a.
double cauchy_selberg_mixture_oracle(int n, double gamma, double beta);

enum class OracleMethod { quadrature, monte_carlo };

std::string_view to_string(OracleMethod method);

struct IdentityCheck {
  std::string identity;
  std::string parameters;
  double closed_form_log = 0.0;
  double closed_form = 0.0;
  double oracle = 0.0;
  double oracle_std_error = 0.0;
  double relative_error = 0.0;
  OracleMethod method = OracleMethod::quadrature;
  // quadrature: relative error within tolerance; monte carlo: within
  // mc_sigmas standard errors.
  bool pass = false;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t mc_samples = 2'000'000;
  std::size_t ball_mc_samples = 10'000'000;
  double quadrature_tolerance = 1e-6;
  double mc_sigmas = 3.0;
};

// The twenty n <= 3 Selberg parameter sets checked against quadrature.
std::vector<SelbergParams> selberg_quadrature_parameter_sets();

std::vector<IdentityCheck> run_selberg_suite(const SuiteOptions& options = {});

}  // namespace fixtrace::selberg
