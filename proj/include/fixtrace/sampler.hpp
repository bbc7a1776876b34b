#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fixtrace/density_grid.hpp"
#include "fixtrace/estimate.hpp"

namespace fixtrace::sampler {

enum class Ensemble { gue, fixed_trace };

std::string_view to_string(Ensemble ensemble);
Ensemble parse_ensemble(std::string_view text);

// dense: Hermitian N x N matrix with density proportional to exp(-tr M^2),
// eigenvalues by a full Hermitian eigensolve. tridiagonal: the beta = 2
// Hermite tridiagonal model with the same eigenvalue law, O(N^2) per draw.
enum class SamplingRoute { dense, tridiagonal };

std::string_view to_string(SamplingRoute route);
SamplingRoute parse_route(std::string_view text);

using Engine = std::mt19937_64;

// Where a sample's randomness comes from. The engine for a sample is a pure
// function of (master seed, stream, index, attempt), so results do not
// depend on how samples are distributed over worker threads.
struct SeedPath {
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
};

std::uint64_t derive_seed(std::uint64_t master_seed, SeedPath path, std::uint64_t attempt = 0);
Engine make_engine(std::uint64_t master_seed, SeedPath path, std::uint64_t attempt = 0);

struct SpectrumSample {
  std::vector<double> eigenvalues;  // ascending
  Ensemble ensemble = Ensemble::gue;
  SeedPath seed_path;
};

// Eigenvalues with joint density proportional to exp(-sum x^2) Delta(x)^2.
// Throws SamplingError if the eigensolver fails.
SpectrumSample sample_gue_spectrum(int n, Engine& engine,
                                   SamplingRoute route = SamplingRoute::dense);

// Radial normalization onto the unit sphere sum x^2 = 1. Because the GUE
// density factorizes into radial and angular parts, the result is an exact
// draw from the fixed trace ensemble.
SpectrumSample project_fixed_trace(const SpectrumSample& sample);

struct SamplingPlan {
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
  int n = 1;
  std::size_t num_samples = 1;
  unsigned workers = 1;
  Ensemble ensemble = Ensemble::fixed_trace;
  SamplingRoute route = SamplingRoute::dense;
};

struct SampleBatch {
  std::vector<SpectrumSample> samples;  // ordered by sample index
  std::size_t retries = 0;
};

SampleBatch generate_spectra(const SamplingPlan& plan);

using fixtrace::Estimate;

struct Support {
  double lo = -1.0;
  double hi = 1.0;
};

// Default histogram supports: [-1, 1] on the sphere, +-(sqrt(2N) + 4) for GUE
// (the density beyond is below exp(-16)).
Support default_support(Ensemble ensemble, int n);

// Histogram of all eigenvalues of all samples, normalized so that the binned
// mass is N (value = count / (num_samples * bin_width)).
struct HistogramEstimate {
  Support support;
  std::size_t bins = 0;
  double bin_width = 0.0;
  int n = 0;
  std::size_t num_samples = 0;
  Ensemble ensemble = Ensemble::gue;
  std::vector<double> values;
  std::vector<double> std_errors;
  double clipped_fraction = 0.0;

  double center(std::size_t bin) const;
  std::vector<double> centers() const;
  double binned_mass() const;
  // Sum of per-bin standard errors times bin width: the scale of the L1
  // distance produced by sampling noise alone.
  double error_budget() const;
  // Piecewise linear through bin centers, padded with the edge values out to
  // the support bounds so that the trapezoid mass equals binned_mass().
  DensityGrid grid() const;
  DensityGrid error_grid() const;
};

inline constexpr double kDefaultMaxClipped = 1e-3;

HistogramEstimate estimate_density(std::span<const SpectrumSample> samples, std::size_t bins,
                                   Support support,
                                   double max_clipped_fraction = kDefaultMaxClipped);

// Same, binning the scaled eigenvalues scale * x_i.
HistogramEstimate estimate_density_scaled(std::span<const SpectrumSample> samples,
                                          std::size_t bins, Support support, double scale,
                                          double max_clipped_fraction = kDefaultMaxClipped);

// Level density at a point from the eigenvalue count in [x - h, x + h].
Estimate estimate_density_at(std::span<const SpectrumSample> samples, double x,
                             double half_width);

// Symmetrized mixed moment: the mean over ordered tuples of distinct indices
// (i_1, ..., i_m) of prod_k x_{i_k}^{p_k}, averaged over samples, with a
// jackknife standard error. Samples must be fixed trace.
Estimate estimate_mixed_moment(std::span<const SpectrumSample> samples,
                               std::span<const int> powers);

// <max_i x_i^2> / <x_1^2>, with <x_1^2> estimated as <sum x_i^2> / N.
Estimate top_eigenvalue_ratio(std::span<const SpectrumSample> samples);
Estimate top_eigenvalue_ratio(int n, std::size_t num_samples, std::uint64_t master_seed,
                              std::uint64_t stream, unsigned workers = 1,
                              SamplingRoute route = SamplingRoute::dense);

}  // namespace fixtrace::sampler
