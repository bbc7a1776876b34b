#pragma once

#include <cstddef>
#include <vector>

namespace fixtrace::specfun {

// ln Gamma(x) for x > 0. Stirling series above x = 10, a Taylor series in
// zeta(k) - 1 on [0.5, 2.5], and the recurrence shifting up to 10 elsewhere.
double log_gamma(double x);

// Gamma(a) / Gamma(b) evaluated as a single exponentiated log difference.
// For large arguments the difference is formed analytically so that close
// arguments (e.g. a = N^2/2, b = (N^2-1)/2) keep full relative accuracy.
double gamma_ratio(double a, double b);

// Regularized incomplete gamma functions P(s, x) and Q(s, x) = 1 - P(s, x).
// Each is computed directly (not as 1 - other) in the regime where it is
// small, so tail masses keep relative accuracy.
double regularized_lower_gamma(double s, double x);
double regularized_upper_gamma(double s, double x);

// log1p(t) - t without cancellation for small |t|.
double log1pmx(double t);

// Orthonormal oscillator function phi_k(x) = H_k(x) exp(-x^2/2) / sqrt(2^k k! sqrt(pi)),
// evaluated by the normalized three-term recurrence with a running exponent
// so that neither H_k nor k! is ever formed.
double hermite_phi(std::size_t k, double x);

// phi_0(x), ..., phi_{count-1}(x).
std::vector<double> hermite_phi_table(std::size_t count, double x);

// sum_{k < count} phi_k(x)^2, accumulated in the scaled recurrence.
double hermite_phi_square_sum(std::size_t count, double x);

struct HermiteEval {
  std::size_t order = 0;
  double point = 0.0;
  double value = 0.0;
};

inline HermiteEval evaluate_hermite(std::size_t k, double x) { return {k, x, hermite_phi(k, x)}; }

}  // namespace fixtrace::specfun
