#pragma once

#include <span>

#include "fixtrace/density_grid.hpp"

namespace fixtrace::gue {

inline constexpr int kMaxLevels = 500;

// Exact level density of the ensemble with joint eigenvalue density
// proportional to exp(-sum x^2) Delta(x)^2: sum_{k<N} phi_k(x)^2, mass N.
double gue_level_density(int n, double x);

// Average of gue_level_density over [lo, hi].
double gue_bin_average(int n, double lo, double hi);

// sqrt(1 - x^2) on |x| <= 1 (mass pi/2), or (2/pi) sqrt(1 - x^2) when
// normalized (mass 1).
double semicircle(double x, bool normalized = true);

// Cumulative distribution of the mass-1 semicircle.
double semicircle_cdf(double x);

// Average of the mass-1 semicircle over [lo, hi].
double semicircle_bin_average(double lo, double hi);

// gue_level_density tabulated on the given abscissae; declared mass N.
DensityGrid tabulate_gue_density(int n, std::span<const double> points);

// `count` equally spaced points covering the bulk and the Gaussian tails:
// |x| <= sqrt(2N) + 8.
DensityGrid tabulate_gue_density(int n, std::size_t count = 2001);

// rho(x) = sqrt(2/N) sigma(sqrt(2N) x). The prefactor already carries the
// 1/N: sqrt(2/N) / sqrt(2N) = 1/N, so rho is a probability density. Throws
// InconsistencyError if the input is not a mass-N grid or the output mass
// is not 1 within 1e-3.
DensityGrid scale_gue_to_rho(int n, const DensityGrid& sigma);

}  // namespace fixtrace::gue
