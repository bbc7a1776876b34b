#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fixtrace/density_grid.hpp"
#include "fixtrace/sampler.hpp"

namespace fixtrace::integral_eq {

// Radial weight exp(-r^2) r^exponent on (0, inf). For the GUE/fixed-trace
// relation the exponent is N^2 - 2: the polar volume element r^{N-1}, the
// Vandermonde homogeneity r^{N(N-1)}, and the 1/r from rescaling x/r.
struct RadialWeight {
  int n = 2;
  double exponent = 2.0;
  double shape = 1.5;     // (exponent + 1) / 2
  double log_norm = 0.0;  // ln of the integral over (0, inf) = ln(Gamma(shape) / 2)

  // exponent_offset shifts the exponent away from N^2 - 2 (negative controls).
  static RadialWeight for_levels(int n, int exponent_offset = 0);

  // Location of the maximum, sqrt(exponent / 2).
  double mode() const;
  // Log of the normalized weight at r > 0.
  double log_density(double r) const;
};

// Normalized mass of [a, b] (b may be +inf), by incomplete gamma in t = r^2.
double radial_mass(const RadialWeight& w, double a, double b);
// Normalized mass of the complement of [a, b], accurate when tiny.
double radial_mass_outside(const RadialWeight& w, double a, double b);

// ln C_N with C_N = integral of exp(-r^2) r^{N^2-1} = Gamma(N^2/2) / 2.
double log_radial_normalizer(int n);

// ln of the prefactor 2 / Gamma(N^2/2) of the mixing operator, fixed two
// independent ways: by requiring the operator to preserve mass, and from
// the ball integral of Delta^2 (sphere area of Delta^2 over the Gaussian
// normalizer).
double log_kernel_constant_from_mass(int n);
double log_kernel_constant_from_ball(int n);

struct ForwardOptions {
  int exponent_offset = 0;
  double window_half_width = 8.0;  // quadrature window mode +- this
  double panel_width = 0.25;
  std::size_t nodes_per_panel = 8;
  std::size_t output_points = 801;
  std::vector<double> output_grid;  // overrides the default symmetric grid
};

// sigma_GUE(x) = 2/Gamma(N^2/2) int_{|x|}^inf exp(-r^2) r^{N^2-2} sigma_v(x/r) dr,
// tabulated on a GUE-scale grid. sigma_v must vanish outside [-1, 1] and
// carry mass N within 1e-2; throws DomainError otherwise, NumericalFailure
// if the output mass drifts by more than 1%.
DensityGrid apply_forward_operator(int n, const DensityGrid& sigma_v,
                                   const ForwardOptions& options = {});

struct VerificationOptions {
  int exponent_offset = 0;
  double relative_tolerance = 0.02;
  unsigned workers = 1;
  sampler::SamplingRoute route = sampler::SamplingRoute::dense;
};

struct IntegralEquationReport {
  int n = 0;
  std::size_t samples = 0;
  std::size_t bins = 0;
  std::size_t retries = 0;
  double l1_distance = 0.0;
  double relative_l1 = 0.0;
  double sup_distance = 0.0;
  double mc_error_budget = 0.0;
  bool pass = false;
  std::vector<double> x;
  std::vector<double> estimated;
  std::vector<double> reference;
};

// Empirical sigma_v from the sampler, pushed through the forward operator,
// compared with the exact GUE density. Passes when the L1 distance is within
// 3x the Monte Carlo budget and the relative L1 is within tolerance.
IntegralEquationReport verify_integral_equation(int n, std::size_t num_samples, std::size_t bins,
                                                std::uint64_t master_seed, std::uint64_t stream,
                                                const VerificationOptions& options = {});

enum class SigmaZeroMode { exact_relation, asymptotic };

struct SigmaZero {
  double value = 0.0;
  // N = 1: the sphere is {-1, +1}, so sigma_v(0) = 0 and Gamma((N^2-1)/2)
  // diverges.
  bool degenerate = false;
};

SigmaZero sigma_v_zero(int n, SigmaZeroMode mode);

struct SemicircleRow {
  int n = 0;
  std::size_t samples = 0;
  std::size_t retries = 0;
  double l1_distance = 0.0;
  double sup_distance = 0.0;
  double error_bar = 0.0;
  double mass_before_renormalization = 0.0;
  std::vector<double> x;
  std::vector<double> estimated;
  std::vector<double> reference;
};

struct SemicircleReport {
  std::vector<SemicircleRow> rows;  // ascending N
  bool monotone = false;
  bool pass = false;
};

inline constexpr double kSemicircleWindow = 0.9;
inline constexpr double kSemicircleTarget = 0.05;

// rho_v(x) = (2/N^{3/2}) sigma_v(2x/sqrt(N)) on [-1.1, 1.1], renormalized to
// mass 1, against the mass-1 semicircle on |x| <= 0.9.
SemicircleReport semicircle_convergence_report(std::span<const int> ns, std::size_t num_samples,
                                               std::size_t bins, std::uint64_t master_seed,
                                               unsigned workers = 1,
                                               sampler::SamplingRoute route =
                                                   sampler::SamplingRoute::dense);

}  // namespace fixtrace::integral_eq
