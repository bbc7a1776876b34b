#include "fixtrace/selberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fixtrace/errors.hpp"
#include "fixtrace/specfun.hpp"

namespace fixtrace::selberg {

using specfun::log_gamma;

namespace {

void require_dimension(int n) {
  if (n < 1) throw DomainError("selberg: dimension n must be positive, got " + std::to_string(n));
}

void require_nonnegative_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("selberg: gamma must be nonnegative, got " + std::to_string(gamma));
  }
}

// ln[ (2 pi)^{n/2} prod_{j=1}^n Gamma(1 + j gamma) / Gamma(1 + gamma) ]
double log_mehta_constant(int n, double gamma) {
  double sum = 0.5 * n * std::log(2.0 * std::numbers::pi);
  const double log_base = log_gamma(1.0 + gamma);
  for (int j = 1; j <= n; ++j) sum += log_gamma(1.0 + j * gamma) - log_base;
  return sum;
}

}  // namespace

double LogValue::value() const { return sign * std::exp(log); }

void SelbergParams::validate() const {
  require_dimension(n);
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw DomainError("selberg: alpha and beta must be positive");
  }
  double bound = 1.0 / n;
  if (n > 1) bound = std::min({bound, alpha / (n - 1), beta / (n - 1)});
  if (!(gamma > -bound) || !std::isfinite(gamma)) {
    throw DomainError("selberg: gamma = " + std::to_string(gamma) + " must exceed " +
                      std::to_string(-bound));
  }
}

LogValue selberg_integral(const SelbergParams& p) {
  p.validate();
  const double a = p.alpha;
  const double b = p.beta;
  const double g = p.gamma;
  const double log_base = log_gamma(1.0 + g);
  double sum = 0.0;
  for (int j = 0; j < p.n; ++j) {
    sum += log_gamma(a + j * g) + log_gamma(b + j * g) + log_gamma(1.0 + (j + 1) * g) -
           log_gamma(a + b + (p.n + j - 1) * g) - log_base;
  }
  return {sum, 1};
}

double aomoto_moment(const SelbergParams& p, int m) {
  p.validate();
  if (m < 1 || m > p.n) {
    throw DomainError("aomoto_moment: m must lie in [1, n], got " + std::to_string(m));
  }
  double ratio = 1.0;
  for (int j = 1; j <= m; ++j) {
    ratio *= (p.alpha + (p.n - j) * p.gamma) / (p.alpha + p.beta + (2 * p.n - j - 1) * p.gamma);
  }
  return ratio;
}

double homogeneity_exponent(int n, double gamma) { return 0.5 * n * (gamma * (n - 1) + 1.0); }

LogValue gaussian_selberg(int n, double gamma, double a) {
  require_dimension(n);
  require_nonnegative_gamma(gamma);
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("gaussian_selberg: a must be positive, got " + std::to_string(a));
  }
  return {log_mehta_constant(n, gamma) - homogeneity_exponent(n, gamma) * std::log(2.0 * a), 1};
}

LogValue cauchy_selberg_integral(int n, double gamma, double beta) {
  require_dimension(n);
  require_nonnegative_gamma(gamma);
  const double k = homogeneity_exponent(n, gamma);
  if (!(beta - k > 0.0)) {
    throw DomainError("cauchy_selberg_integral: beta must exceed n (gamma (n-1) + 1) / 2");
  }
  return {log_gamma(beta - k) - log_gamma(beta) + log_mehta_constant(n, gamma) -
              k * std::numbers::ln2,
          1};
}

LogValue generalized_ball_integral(int n, double gamma, double beta) {
  // The substitution x = y / sqrt(1 - |y|^2) maps R^n onto the unit ball and
  // turns the (1 + |x|^2)^{-beta} integral into this one; the values agree.
  require_dimension(n);
  require_nonnegative_gamma(gamma);
  const double exponent = beta - homogeneity_exponent(n, gamma) - 1.0;
  if (!(exponent > -1.0)) {
    throw DomainError("generalized_ball_integral: exponent " + std::to_string(exponent) +
                      " is not integrable at the sphere");
  }
  return cauchy_selberg_integral(n, gamma, beta);
}

LogValue ball_vandermonde_integral(int n, double radius) {
  require_dimension(n);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("ball_vandermonde_integral: radius must be positive");
  }
  const double n2 = static_cast<double>(n) * n;
  double sum = n2 * std::log(radius) - log_gamma(0.5 * n2 + 1.0) +
               0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * n2 * std::numbers::ln2;
  for (int j = 1; j <= n; ++j) sum += log_gamma(1.0 + j);
  return {sum, 1};
}

}  // namespace fixtrace::selberg
