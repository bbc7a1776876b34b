#pragma once

#include <cstddef>
#include <vector>

namespace fixtrace::quadrature {

// Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_n.
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t order);

  std::size_t order() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

  // Composite rule over `panels` equal subintervals of [a, b].
  template <typename F>
  double integrate_composite(F&& f, double a, double b, std::size_t panels) const {
    const double width = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + width * static_cast<double>(p);
      sum += integrate(f, lo, p + 1 == panels ? b : lo + width);
    }
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace fixtrace::quadrature
