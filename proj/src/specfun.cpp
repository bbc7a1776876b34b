#include "fixtrace/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fixtrace/errors.hpp"

namespace fixtrace::specfun {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2 pi) / 2
constexpr double kStirlingThreshold = 10.0;

// B_{2k} / (2k (2k-1)) for k = 1..9.
constexpr std::array<double, 9> kStirlingCoefficients = {
    1.0 / 12.0,         -1.0 / 360.0,         1.0 / 1260.0,
    -1.0 / 1680.0,      1.0 / 1188.0,         -691.0 / 360360.0,
    1.0 / 156.0,        -3617.0 / 122400.0,   43867.0 / 244188.0,
};

// ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], valid for x >= 10.
double stirling_correction(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double sum = 0.0;
  double power = inv;
  for (double c : kStirlingCoefficients) {
    const double term = c * power;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    power *= inv2;
  }
  return sum;
}

// zeta(k) - 1 for k = 2..kZetaTerms+1, by direct summation to M = 100 plus
// Euler-Maclaurin tail terms.
constexpr int kZetaTerms = 40;

std::array<double, kZetaTerms> zeta_minus_one() {
  std::array<double, kZetaTerms> out{};
  constexpr double m = 100.0;
  for (int i = 0; i < kZetaTerms; ++i) {
    const double k = i + 2.0;
    double sum = 0.0;
    for (int n = 99; n >= 2; --n) sum += std::pow(n, -k);
    sum += std::pow(m, 1.0 - k) / (k - 1.0) + 0.5 * std::pow(m, -k) +
           k * std::pow(m, -k - 1.0) / 12.0 -
           k * (k + 1.0) * (k + 2.0) * std::pow(m, -k - 3.0) / 720.0;
    out[i] = sum;
  }
  return out;
}

// ln Gamma(2 + z) for |z| <= 1/2: z (1 - euler_gamma) + sum_k (-1)^k (zeta(k) - 1) z^k / k.
// Exact zeros at z = 0 and full relative accuracy near them.
double log_gamma_two_plus(double z) {
  static const std::array<double, kZetaTerms> zeta = zeta_minus_one();
  double sum = 0.0;
  double power = -z;  // (-z)^k
  for (int i = 0; i < kZetaTerms; ++i) {
    power *= -z;
    const double term = zeta[i] * power / (i + 2.0);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return z * (1.0 - std::numbers::egamma) + sum;
}

double log_gamma_stirling(double x) {
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_correction(x);
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

// ln( x^s e^{-x} / Gamma(s) ), the common prefactor of P and Q.
double log_incomplete_prefactor(double s, double x) {
  if (s >= kStirlingThreshold) {
    const double t = (x - s) / s;
    return s * log1pmx(t) + 0.5 * std::log(s) - kHalfLog2Pi - stirling_correction(s);
  }
  return s * std::log(x) - x - log_gamma(s);
}

// P(s, x) by its power series; intended for x < s + 1.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < 1000000; ++n) {
    term *= x / (s + n);
    sum += term;
    if (term < sum * 1e-17) {
      return std::exp(log_incomplete_prefactor(s, x)) * sum;
    }
  }
  throw NumericalFailure("regularized incomplete gamma: series did not converge");
}

// Q(s, x) by modified Lentz continued fraction; intended for x >= s + 1.
double upper_gamma_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return std::exp(log_incomplete_prefactor(s, x)) * h;
    }
  }
  throw NumericalFailure("regularized incomplete gamma: continued fraction did not converge");
}

void require_incomplete_domain(double s, double x) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("regularized incomplete gamma: shape must be positive, got " +
                      std::to_string(s));
  }
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("regularized incomplete gamma: x must be nonnegative, got " +
                      std::to_string(x));
  }
}

}  // namespace

double log1pmx(double t) {
  if (t <= -1.0) {
    return t == -1.0 ? -std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::quiet_NaN();
  }
  if (std::abs(t) > 0.5) return std::log1p(t) - t;
  // -t^2/2 + t^3/3 - t^4/4 + ...
  double power = t * t;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    const double term = ((k % 2 == 0) ? -power : power) / k;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    power *= t;
  }
  return sum;
}

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x >= kStirlingThreshold) return log_gamma_stirling(x);
  if (x >= 1.5 && x <= 2.5) return log_gamma_two_plus(x - 2.0);
  // ln Gamma(1 + z) = ln Gamma(2 + z) - ln(1 + z)
  if (x >= 0.5 && x < 1.5) return log_gamma_two_plus(x - 1.0) - std::log1p(x - 1.0);
  // Shift up into the Stirling range: Gamma(x) = Gamma(x + m) / (x (x+1) ... (x+m-1)).
  double product = 1.0;
  double shifted = x;
  while (shifted < kStirlingThreshold) {
    product *= shifted;
    shifted += 1.0;
  }
  return log_gamma_stirling(shifted) - std::log(product);
}

double gamma_ratio(double a, double b) {
  require_positive(a, "gamma_ratio");
  require_positive(b, "gamma_ratio");
  if (a == b) return 1.0;
  if (a >= kStirlingThreshold && b >= kStirlingThreshold) {
    // (a-1/2) ln a - (b-1/2) ln b - (a - b), rearranged to avoid cancellation.
    const double d = a - b;
    const double log_ratio = (b - 0.5) * std::log1p(d / b) + d * std::log(a) - d +
                             stirling_correction(a) - stirling_correction(b);
    return std::exp(log_ratio);
  }
  return std::exp(log_gamma(a) - log_gamma(b));
}

double regularized_lower_gamma(double s, double x) {
  require_incomplete_domain(s, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return lower_gamma_series(s, x);
  return 1.0 - upper_gamma_fraction(s, x);
}

double regularized_upper_gamma(double s, double x) {
  require_incomplete_domain(s, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return 1.0 - lower_gamma_series(s, x);
  return upper_gamma_fraction(s, x);
}

namespace {

constexpr double kRescaleThreshold = 1e150;
const double kLogRescale = std::log(kRescaleThreshold);

void require_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("hermite_phi: point must be finite");
}

double unscale(double value, double log_scale) {
  if (value == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(value)) + log_scale), value);
}

// Walks phi_0 .. phi_{count-1}, calling visit(k, scaled_value, log_scale).
template <typename Visitor>
void hermite_recurrence(std::size_t count, double x, Visitor&& visit) {
  if (count == 0) return;
  double previous = 0.0;
  double current = std::pow(std::numbers::pi, -0.25);
  double log_scale = -0.5 * x * x;
  visit(std::size_t{0}, current, log_scale);
  for (std::size_t j = 0; j + 1 < count; ++j) {
    const double jd = static_cast<double>(j);
    const double next =
        x * std::sqrt(2.0 / (jd + 1.0)) * current - std::sqrt(jd / (jd + 1.0)) * previous;
    previous = current;
    current = next;
    if (std::abs(current) > kRescaleThreshold) {
      current /= kRescaleThreshold;
      previous /= kRescaleThreshold;
      log_scale += kLogRescale;
    }
    visit(j + 1, current, log_scale);
  }
}

}  // namespace

double hermite_phi(std::size_t k, double x) {
  require_finite(x);
  double result = 0.0;
  hermite_recurrence(k + 1, x, [&](std::size_t j, double value, double log_scale) {
    if (j == k) result = unscale(value, log_scale);
  });
  return result;
}

std::vector<double> hermite_phi_table(std::size_t count, double x) {
  require_finite(x);
  std::vector<double> table(count);
  hermite_recurrence(count, x, [&](std::size_t j, double value, double log_scale) {
    table[j] = unscale(value, log_scale);
  });
  return table;
}

double hermite_phi_square_sum(std::size_t count, double x) {
  require_finite(x);
  double sum = 0.0;
  hermite_recurrence(count, x, [&](std::size_t, double value, double log_scale) {
    const double phi = unscale(value, log_scale);
    sum += phi * phi;
  });
  return sum;
}

}  // namespace fixtrace::specfun
