#include "fixtrace/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "fixtrace/errors.hpp"

namespace fixtrace::quadrature {

GaussLegendre::GaussLegendre(std::size_t order) : nodes_(order), weights_(order) {
  if (order == 0) throw DomainError("GaussLegendre: order must be positive");
  const std::size_t n = order;
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double jd = static_cast<double>(j);
        p0 = ((2.0 * jd + 1.0) * z * p1 - jd * p2) / (jd + 1.0);
      }
      derivative = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / derivative;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
    nodes_[i] = -z;
    nodes_[n - 1 - i] = z;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
}

}  // namespace fixtrace::quadrature
