#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fixtrace/errors.hpp"
#include "fixtrace/sampler.hpp"

using namespace fixtrace;
using namespace fixtrace::sampler;

namespace {

SampleBatch draw(int n, std::size_t count, Ensemble ensemble, std::uint64_t seed = 99,
                 unsigned workers = 1, SamplingRoute route = SamplingRoute::dense) {
  SamplingPlan plan;
  plan.master_seed = seed;
  plan.stream = static_cast<std::uint64_t>(n);
  plan.n = n;
  plan.num_samples = count;
  plan.workers = workers;
  plan.ensemble = ensemble;
  plan.route = route;
  return generate_spectra(plan);
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (v.size() - 1) / v.size())};
}

// Fixed trace, N = 2: points (cos t, sin t) with angular weight (cos t - sin t)^2 / (2 pi).
double circle_weight(double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [](double t) { return std::pow(std::cos(t) - std::sin(t), 2) / (2.0 * std::numbers::pi); },
      a, b, 15, 1e-14);
}

// Probability that cos t (first) and sin t (second) land in [lo, hi].
std::pair<double, double> circle_bin_mass(double lo, double hi) {
  const double cos_mass = circle_weight(std::acos(hi), std::acos(lo)) +
                          circle_weight(-std::acos(lo), -std::acos(hi));
  const double sin_mass = circle_weight(std::asin(lo), std::asin(hi)) +
                          circle_weight(std::numbers::pi - std::asin(hi),
                                        std::numbers::pi - std::asin(lo));
  return {cos_mass, sin_mass};
}

double circle_average(auto f) {
  double total = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double lo = k * std::numbers::pi / 4.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double t) {
          const double w = std::pow(std::cos(t) - std::sin(t), 2) / (2.0 * std::numbers::pi);
          return w * f(std::cos(t), std::sin(t));
        },
        lo, lo + std::numbers::pi / 4.0, 15, 1e-14);
  }
  return total;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("enum names round trip") {
  CHECK(parse_ensemble(to_string(Ensemble::gue)) == Ensemble::gue);
  CHECK(parse_ensemble("fixed_trace") == Ensemble::fixed_trace);
  CHECK(parse_route(to_string(SamplingRoute::tridiagonal)) == SamplingRoute::tridiagonal);
  CHECK_THROWS_AS(parse_route("lanczos"), DomainError);
  CHECK_THROWS_AS(parse_ensemble("goe"), DomainError);
}

TEST_CASE("seed derivation depends on every coordinate") {
  const auto base = derive_seed(1, {2, 3}, 0);
  CHECK(derive_seed(1, {2, 3}, 0) == base);
  CHECK(derive_seed(2, {2, 3}, 0) != base);
  CHECK(derive_seed(1, {3, 3}, 0) != base);
  CHECK(derive_seed(1, {2, 4}, 0) != base);
  CHECK(derive_seed(1, {2, 3}, 1) != base);
}

TEST_CASE("N = 1 GUE variance is 1/2") {
  const auto batch = draw(1, 100'000, Ensemble::gue);
  std::vector<double> squares;
  for (const auto& s : batch.samples) squares.push_back(s.eigenvalues[0] * s.eigenvalues[0]);
  const double variance = moments(squares).mean;
  CHECK(variance >= 0.49);
  CHECK(variance <= 0.51);
}

TEST_CASE("GUE trace moments at N = 4") {
  for (auto route : {SamplingRoute::dense, SamplingRoute::tridiagonal}) {
    const auto batch = draw(4, 100'000, Ensemble::gue, 7, 1, route);
    std::vector<double> sums;
    std::vector<double> squares;
    for (const auto& s : batch.samples) {
      double a = 0.0;
      double b = 0.0;
      for (double x : s.eigenvalues) {
        a += x;
        b += x * x;
      }
      sums.push_back(a);
      squares.push_back(b);
    }
    const auto first = moments(sums);
    const auto second = moments(squares);
    INFO("route=", to_string(route), " sum=", first.mean, " sumsq=", second.mean);
    CHECK(std::abs(first.mean) <= 3.0 * first.se);
    CHECK(std::abs(second.mean - 8.0) <= 3.0 * second.se);
  }
}

TEST_CASE("eigenvalues are ascending and tagged") {
  const auto batch = draw(6, 20, Ensemble::fixed_trace);
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    const auto& s = batch.samples[i];
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    CHECK(s.ensemble == Ensemble::fixed_trace);
    CHECK(s.seed_path.index == i);
  }
}

TEST_CASE("projection onto the sphere") {
  SpectrumSample s{{-1.0, 0.0, 1.0, std::sqrt(2.0)}, Ensemble::gue, {}};
  const auto p = project_fixed_trace(s);
  CHECK(p.ensemble == Ensemble::fixed_trace);
  for (std::size_t i = 0; i < 4; ++i) CHECK(p.eigenvalues[i] == s.eigenvalues[i] / 2.0);
  CHECK_THROWS_AS(project_fixed_trace(p), DomainError);
  const auto batch = draw(7, 2000, Ensemble::fixed_trace);
  for (const auto& sample : batch.samples) {
    double norm = 0.0;
    for (double x : sample.eigenvalues) norm += x * x;
    CHECK(std::abs(norm - 1.0) <= 1e-12);
  }
}

TEST_CASE("N = 2 fixed trace marginal against the circle oracle") {
  const auto batch = draw(2, 1'000'000, Ensemble::fixed_trace, 4242);
  const std::size_t bins = 50;
  const auto hist = estimate_density(batch.samples, bins, {-1.0, 1.0});
  CHECK(hist.clipped_fraction == 0.0);
  double l1 = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = -1.0 + b * hist.bin_width;
    const double hi = lo + hist.bin_width;
    // Probability that a uniformly chosen coordinate lands in the bin.
    const auto [cos_mass, sin_mass] = circle_bin_mass(lo, hi);
    const double p = 0.5 * (cos_mass + sin_mass);
    l1 += std::abs(hist.values[b] / 2.0 - p / hist.bin_width) * hist.bin_width;
  }
  INFO("L1=", l1);
  CHECK(l1 <= 0.01);
}

TEST_CASE("histogram accounting") {
  const auto batch = draw(5, 3000, Ensemble::fixed_trace);
  const auto hist = estimate_density(batch.samples, 64, {-1.0, 1.0});
  CHECK(hist.clipped_fraction == 0.0);
  CHECK(std::abs(hist.binned_mass() - 5.0) <= 1e-9);
  CHECK(std::abs(hist.grid().trapezoid_mass() - 5.0) <= 1e-9);
  CHECK(hist.grid().front() == -1.0);
  CHECK(hist.grid().back() == 1.0);
  // GUE draws binned on the sphere support are mostly clipped.
  const auto gue = draw(5, 200, Ensemble::gue);
  CHECK_THROWS_AS(estimate_density(gue.samples, 10, {-1.0, 1.0}), SamplingError);
}

TEST_CASE("symmetry under x -> -x at N = 10") {
  const auto batch = draw(10, 100'000, Ensemble::fixed_trace, 1010);
  const std::size_t bins = 200;
  const auto hist = estimate_density(batch.samples, bins, {-1.0, 1.0});
  int violations = 0;
  for (std::size_t b = 0; b < bins / 2; ++b) {
    const std::size_t m = bins - 1 - b;
    const double se = std::hypot(hist.std_errors[b], hist.std_errors[m]);
    if (std::abs(hist.values[b] - hist.values[m]) > 3.0 * se) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("point estimate of the density") {
  const auto batch = draw(3, 20'000, Ensemble::fixed_trace);
  const auto hist = estimate_density(batch.samples, 20, {-1.0, 1.0});
  const auto at = estimate_density_at(batch.samples, hist.center(7), hist.bin_width / 2.0);
  CHECK(at.value == doctest::Approx(hist.values[7]).epsilon(1e-12));
  CHECK(at.std_error == doctest::Approx(hist.std_errors[7]).epsilon(1e-12));
}

TEST_CASE("mixed moments") {
  const auto batch = draw(4, 50'000, Ensemble::fixed_trace);
  const std::vector<int> square{2};
  const auto m2 = estimate_mixed_moment(batch.samples, square);
  CHECK(4.0 * m2.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m2.std_error <= 1e-12);
  const std::vector<int> first{1};
  const auto m1 = estimate_mixed_moment(batch.samples, first);
  CHECK(std::abs(m1.value) <= 3.0 * m1.std_error);
  const auto two = draw(2, 1000, Ensemble::fixed_trace);
  CHECK(estimate_mixed_moment(two.samples, square).value == doctest::Approx(0.5).epsilon(1e-12));
  // sum_{i != j} x_i x_j = (sum x)^2 - 1 on the sphere.
  const std::vector<int> pair{1, 1};
  const auto m11 = estimate_mixed_moment(batch.samples, pair);
  double direct = 0.0;
  for (const auto& s : batch.samples) {
    const double t = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    direct += (t * t - 1.0) / 12.0;
  }
  CHECK(m11.value == doctest::Approx(direct / batch.samples.size()).epsilon(1e-10));
  const std::vector<int> too_many{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(estimate_mixed_moment(batch.samples, too_many), DomainError);
}

TEST_CASE("top eigenvalue ratio") {
  const auto one = top_eigenvalue_ratio(1, 100, 5, 0);
  CHECK(one.value == 1.0);
  for (int n : {3, 8}) CHECK(top_eigenvalue_ratio(n, 500, 5, 1).value >= 1.0);

  // N = 2 oracle: numerator and denominator as circle averages.
  const double numerator =
      circle_average([](double c, double s) { return std::max(c * c, s * s); });
  const double denominator = circle_average([](double c, double s) { return (c * c + s * s) / 2.0; });
  CHECK(numerator / denominator ==
        doctest::Approx((std::numbers::pi + 2.0) / std::numbers::pi).epsilon(1e-12));
  const auto ratio = top_eigenvalue_ratio(2, 1'000'000, 77, 2);
  INFO("ratio=", ratio.value, " se=", ratio.std_error);
  CHECK(std::abs(ratio.value - numerator / denominator) <= 3.0 * ratio.std_error);
}

TEST_CASE("radial and angular parts are independent") {
  const auto batch = draw(5, 1'000'000, Ensemble::gue, 555);
  std::vector<double> radius;
  std::vector<double> statistic;
  for (const auto& s : batch.samples) {
    double norm = 0.0;
    for (double x : s.eigenvalues) norm += x * x;
    norm = std::sqrt(norm);
    radius.push_back(norm);
    // Bounded angular statistic: squared top coordinate on the sphere.
    statistic.push_back(std::pow(s.eigenvalues.back() / norm, 2));
  }
  const auto r = moments(radius);
  const auto a = moments(statistic);
  double cov = 0.0;
  double vr = 0.0;
  double va = 0.0;
  for (std::size_t i = 0; i < radius.size(); ++i) {
    cov += (radius[i] - r.mean) * (statistic[i] - a.mean);
    vr += (radius[i] - r.mean) * (radius[i] - r.mean);
    va += (statistic[i] - a.mean) * (statistic[i] - a.mean);
  }
  const double correlation = cov / std::sqrt(vr * va);
  const double se = 1.0 / std::sqrt(static_cast<double>(radius.size()));
  INFO("corr=", correlation);
  CHECK(std::abs(correlation) <= 3.0 * se);
}

TEST_CASE("sup of sigma_v / N^{3/2} stays bounded") {
  double at10 = 0.0;
  double at100 = 0.0;
  for (int n : {10, 50, 100}) {
    const auto batch = draw(n, n == 100 ? 1500 : 4000, Ensemble::fixed_trace, 3);
    const auto hist = estimate_density(batch.samples, 200, {-1.0, 1.0});
    const double peak =
        *std::max_element(hist.values.begin(), hist.values.end()) / std::pow(n, 1.5);
    INFO("N=", n, " peak=", peak);
    CHECK(peak <= 0.7);
    if (n == 10) at10 = peak;
    if (n == 100) at100 = peak;
  }
  CHECK(at100 <= 1.5 * at10);
}

TEST_CASE("results do not depend on the worker count") {
  for (auto route : {SamplingRoute::dense, SamplingRoute::tridiagonal}) {
    const auto one = draw(6, 997, Ensemble::fixed_trace, 11, 1, route);
    const auto three = draw(6, 997, Ensemble::fixed_trace, 11, 3, route);
    const auto eight = draw(6, 997, Ensemble::fixed_trace, 11, 8, route);
    REQUIRE(one.samples.size() == three.samples.size());
    bool identical = true;
    for (std::size_t i = 0; i < one.samples.size(); ++i) {
      identical = identical && one.samples[i].eigenvalues == three.samples[i].eigenvalues &&
                  one.samples[i].eigenvalues == eight.samples[i].eigenvalues;
    }
    CHECK(identical);
  }
}

TEST_CASE("invalid plans") {
  CHECK_THROWS_AS(draw(0, 10, Ensemble::gue), DomainError);
  CHECK_THROWS_AS(draw(3, 0, Ensemble::gue), DomainError);
  CHECK_THROWS_AS(draw(3, 10, Ensemble::gue, 1, 0), DomainError);
}

}  // TEST_SUITE
