#pragma once

namespace fixtrace::selberg {

// A positive (or signed) quantity carried as ln|v| and a sign. Closed forms
// below overflow double precision long before their parameters look large
// (n = 10, gamma = 1 already does), so everything is accumulated here.
struct LogValue {
  double log = 0.0;
  int sign = 1;

  double value() const;
};

// Parameters of the Selberg integral over [0,1]^n with weight
// |Delta|^{2 gamma} prod x^{alpha-1} (1-x)^{beta-1}.
struct SelbergParams {
  int n = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;

  // Throws DomainError unless alpha > 0, beta > 0 and
  // gamma > -min(1/n, alpha/(n-1), beta/(n-1)).
  void validate() const;
};

LogValue selberg_integral(const SelbergParams& p);

// <x_1 ... x_m> under the Selberg weight, i.e. the Aomoto moment divided by
// the Selberg integral. Requires 1 <= m <= n.
double aomoto_moment(const SelbergParams& p, int m);

// Integral over R^n of |Delta|^{2 gamma} prod exp(-a x_j^2).
LogValue gaussian_selberg(int n, double gamma, double a);

// Integral over R^n of |Delta|^{2 gamma} (1 + sum x^2)^{-beta}.
// Requires beta > n (gamma (n-1) + 1) / 2.
LogValue cauchy_selberg_integral(int n, double gamma, double beta);

// Integral over the unit ball of |Delta|^{2 gamma} (1 - sum y^2)^e with
// e = beta - n (gamma (n-1) + 1)/2 - 1 > -1.
LogValue generalized_ball_integral(int n, double gamma, double beta);

// Integral of Delta^2 over the ball of radius R in R^n.
LogValue ball_vandermonde_integral(int n, double radius);

// Half the homogeneity degree of |Delta|^{2 gamma} dx: n (gamma (n-1) + 1) / 2.
double homogeneity_exponent(int n, double gamma);

}  // namespace fixtrace::selberg
