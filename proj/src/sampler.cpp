#include "fixtrace/sampler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <thread>

#include "fixtrace/errors.hpp"

namespace fixtrace::sampler {

std::string_view to_string(Ensemble ensemble) {
  return ensemble == Ensemble::gue ? "gue" : "fixed_trace";
}

Ensemble parse_ensemble(std::string_view text) {
  if (text == "gue") return Ensemble::gue;
  if (text == "fixed_trace" || text == "fixed-trace") return Ensemble::fixed_trace;
  throw DomainError("unknown ensemble '" + std::string(text) + "'");
}

std::string_view to_string(SamplingRoute route) {
  return route == SamplingRoute::dense ? "dense" : "tridiagonal";
}

SamplingRoute parse_route(std::string_view text) {
  if (text == "dense") return SamplingRoute::dense;
  if (text == "tridiagonal") return SamplingRoute::tridiagonal;
  throw DomainError("unknown sampling route '" + std::string(text) + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> dense_gue_eigenvalues(int n, Engine& engine) {
  // exp(-tr M^2): diagonal entries have variance 1/2, real and imaginary
  // parts of off-diagonal entries variance 1/4 each.
  std::normal_distribution<double> diagonal(0.0, std::sqrt(0.5));
  std::normal_distribution<double> off_diagonal(0.0, 0.5);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = diagonal(engine);
    for (int j = 0; j < i; ++j) {
      const double re = off_diagonal(engine);
      const double im = off_diagonal(engine);
      m(i, j) = std::complex<double>(re, im);
      m(j, i) = std::conj(m(i, j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SamplingError("Hermitian eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + n);
}

std::vector<double> tridiagonal_gue_eigenvalues(int n, Engine& engine) {
  // Householder reduction of the dense model: diagonal N(0, 1/2), k-th
  // subdiagonal entry chi_{2k} / 2 for k = n-1, ..., 1.
  std::normal_distribution<double> diagonal(0.0, std::sqrt(0.5));
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag(i) = diagonal(engine);
  for (int i = 0; i + 1 < n; ++i) {
    std::gamma_distribution<double> chi_squared_half(static_cast<double>(n - 1 - i), 2.0);
    sub(i) = 0.5 * std::sqrt(chi_squared_half(engine));
  }
  if (n == 1) return {diag(0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SamplingError("tridiagonal eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + n);
}

void require_uniform(std::span<const SpectrumSample> samples) {
  if (samples.empty()) throw DomainError("no samples");
  const std::size_t n = samples.front().eigenvalues.size();
  const Ensemble ensemble = samples.front().ensemble;
  for (const auto& s : samples) {
    if (s.eigenvalues.size() != n || s.ensemble != ensemble) {
      throw DomainError("samples must share N and ensemble");
    }
  }
}

Estimate mean_with_error(std::span<const double> values) {
  const double count = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

// Runs body(begin, end) over contiguous index ranges on `workers` threads.
void parallel_ranges(std::size_t count, unsigned workers,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, SeedPath path, std::uint64_t attempt) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ path.stream);
  h = splitmix64(h ^ path.index);
  return splitmix64(h ^ attempt);
}

Engine make_engine(std::uint64_t master_seed, SeedPath path, std::uint64_t attempt) {
  return Engine(derive_seed(master_seed, path, attempt));
}

SpectrumSample sample_gue_spectrum(int n, Engine& engine, SamplingRoute route) {
  if (n < 1) throw DomainError("sample_gue_spectrum: N must be positive");
  SpectrumSample sample;
  sample.ensemble = Ensemble::gue;
  sample.eigenvalues = route == SamplingRoute::dense ? dense_gue_eigenvalues(n, engine)
                                                     : tridiagonal_gue_eigenvalues(n, engine);
  std::sort(sample.eigenvalues.begin(), sample.eigenvalues.end());
  return sample;
}

SpectrumSample project_fixed_trace(const SpectrumSample& sample) {
  if (sample.ensemble != Ensemble::gue) {
    throw DomainError("project_fixed_trace: input must be a GUE sample");
  }
  double norm_squared = 0.0;
  for (double x : sample.eigenvalues) norm_squared += x * x;
  if (!(norm_squared > 0.0)) throw SamplingError("project_fixed_trace: zero eigenvalue vector");
  const double norm = std::sqrt(norm_squared);
  SpectrumSample projected = sample;
  projected.ensemble = Ensemble::fixed_trace;
  for (double& x : projected.eigenvalues) x /= norm;
  return projected;
}

SampleBatch generate_spectra(const SamplingPlan& plan) {
  if (plan.n < 1) throw DomainError("generate_spectra: N must be positive");
  if (plan.num_samples < 1) throw DomainError("generate_spectra: need at least one sample");
  if (plan.workers < 1) throw DomainError("generate_spectra: need at least one worker");
  SampleBatch batch;
  batch.samples.resize(plan.num_samples);
  std::vector<std::size_t> retries(plan.num_samples, 0);
  constexpr std::uint64_t kMaxAttempts = 16;
  parallel_ranges(plan.num_samples, plan.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const SeedPath path{plan.stream, i};
      for (std::uint64_t attempt = 0;; ++attempt) {
        try {
          Engine engine = make_engine(plan.master_seed, path, attempt);
          SpectrumSample s = sample_gue_spectrum(plan.n, engine, plan.route);
          if (plan.ensemble == Ensemble::fixed_trace) s = project_fixed_trace(s);
          s.seed_path = path;
          batch.samples[i] = std::move(s);
          break;
        } catch (const SamplingError&) {
          if (attempt + 1 >= kMaxAttempts) throw;
          ++retries[i];
        }
      }
    }
  });
  batch.retries = std::accumulate(retries.begin(), retries.end(), std::size_t{0});
  return batch;
}

Support default_support(Ensemble ensemble, int n) {
  if (ensemble == Ensemble::fixed_trace) return {-1.0, 1.0};
  const double half = std::sqrt(2.0 * n) + 4.0;
  return {-half, half};
}

double HistogramEstimate::center(std::size_t bin) const {
  return support.lo + (static_cast<double>(bin) + 0.5) * bin_width;
}

std::vector<double> HistogramEstimate::centers() const {
  std::vector<double> c(bins);
  for (std::size_t b = 0; b < bins; ++b) c[b] = center(b);
  return c;
}

double HistogramEstimate::binned_mass() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * bin_width;
}

double HistogramEstimate::error_budget() const {
  return std::accumulate(std_errors.begin(), std_errors.end(), 0.0) * bin_width;
}

namespace {

DensityGrid padded_grid(const HistogramEstimate& h, const std::vector<double>& values,
                        double mass, double tolerance, std::string kind) {
  std::vector<double> points;
  std::vector<double> padded;
  points.reserve(h.bins + 2);
  padded.reserve(h.bins + 2);
  points.push_back(h.support.lo);
  padded.push_back(values.front());
  for (std::size_t b = 0; b < h.bins; ++b) {
    points.push_back(h.center(b));
    padded.push_back(values[b]);
  }
  points.push_back(h.support.hi);
  padded.push_back(values.back());
  return DensityGrid(std::move(points), std::move(padded), mass, tolerance, std::move(kind),
                     h.n);
}

}  // namespace

DensityGrid HistogramEstimate::grid() const {
  const std::string kind = std::string(to_string(ensemble)) + "_histogram";
  return padded_grid(*this, values, binned_mass(), DensityGrid::kDefaultTolerance, kind);
}

DensityGrid HistogramEstimate::error_grid() const {
  const double budget = error_budget();
  return padded_grid(*this, std_errors, budget > 0.0 ? budget : 1.0, DensityGrid::kUnchecked,
                     "standard_error");
}

HistogramEstimate estimate_density_scaled(std::span<const SpectrumSample> samples,
                                          std::size_t bins, Support support, double scale,
                                          double max_clipped_fraction) {
  require_uniform(samples);
  if (bins < 10) throw DomainError("estimate_density: need at least 10 bins");
  if (!(support.hi > support.lo)) throw DomainError("estimate_density: empty support");
  HistogramEstimate h;
  h.support = support;
  h.bins = bins;
  h.bin_width = (support.hi - support.lo) / static_cast<double>(bins);
  h.n = static_cast<int>(samples.front().eigenvalues.size());
  h.num_samples = samples.size();
  h.ensemble = samples.front().ensemble;

  std::vector<double> sum(bins, 0.0);
  std::vector<double> sum_squares(bins, 0.0);
  std::vector<int> per_sample(bins, 0);
  std::vector<std::size_t> touched;
  std::size_t clipped = 0;
  for (const auto& s : samples) {
    touched.clear();
    for (double raw : s.eigenvalues) {
      const double x = scale * raw;
      if (!(x >= support.lo && x <= support.hi)) {
        ++clipped;
        continue;
      }
      auto b = static_cast<std::size_t>((x - support.lo) / h.bin_width);
      b = std::min(b, bins - 1);
      if (per_sample[b]++ == 0) touched.push_back(b);
    }
    for (std::size_t b : touched) {
      const double c = per_sample[b];
      sum[b] += c;
      sum_squares[b] += c * c;
      per_sample[b] = 0;
    }
  }

  const double count = static_cast<double>(samples.size());
  h.clipped_fraction = static_cast<double>(clipped) / (count * h.n);
  if (h.clipped_fraction > max_clipped_fraction) {
    throw SamplingError("estimate_density: clipped mass fraction " +
                        format_number(h.clipped_fraction) + " exceeds " +
                        format_number(max_clipped_fraction));
  }
  h.values.resize(bins);
  h.std_errors.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double mean = sum[b] / count;
    h.values[b] = mean / h.bin_width;
    double variance = 0.0;
    if (samples.size() > 1) {
      variance = std::max(0.0, (sum_squares[b] - count * mean * mean) / (count - 1.0));
    }
    h.std_errors[b] = std::sqrt(variance / count) / h.bin_width;
  }
  return h;
}

HistogramEstimate estimate_density(std::span<const SpectrumSample> samples, std::size_t bins,
                                   Support support, double max_clipped_fraction) {
  return estimate_density_scaled(samples, bins, support, 1.0, max_clipped_fraction);
}

Estimate estimate_density_at(std::span<const SpectrumSample> samples, double x,
                             double half_width) {
  require_uniform(samples);
  if (!(half_width > 0.0)) throw DomainError("estimate_density_at: half width must be positive");
  std::vector<double> per_sample(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& ev = samples[i].eigenvalues;
    per_sample[i] = static_cast<double>(std::count_if(ev.begin(), ev.end(), [&](double v) {
                      return std::abs(v - x) <= half_width;
                    })) /
                    (2.0 * half_width);
  }
  return mean_with_error(per_sample);
}

namespace {

// Sum over injective maps k -> i_k of prod_k x_{i_k}^{p_k}.
void accumulate_injective(const std::vector<double>& x, std::span<const int> powers,
                          std::size_t depth, double product, std::vector<char>& used,
                          double& total) {
  if (depth == powers.size()) {
    total += product;
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    accumulate_injective(x, powers, depth + 1, product * std::pow(x[i], powers[depth]), used,
                         total);
    used[i] = 0;
  }
}

}  // namespace

Estimate estimate_mixed_moment(std::span<const SpectrumSample> samples,
                               std::span<const int> powers) {
  require_uniform(samples);
  if (samples.front().ensemble != Ensemble::fixed_trace) {
    throw DomainError("estimate_mixed_moment: samples must be fixed trace");
  }
  const std::size_t n = samples.front().eigenvalues.size();
  if (powers.empty() || powers.size() > n) {
    throw DomainError("estimate_mixed_moment: need between 1 and N exponents");
  }
  double tuples = 1.0;
  for (std::size_t k = 0; k < powers.size(); ++k) tuples *= static_cast<double>(n - k);
  if (tuples > 1e6) {
    throw DomainError("estimate_mixed_moment: too many index tuples to enumerate");
  }
  std::vector<double> per_sample(samples.size());
  std::vector<char> used(n, 0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double total = 0.0;
    accumulate_injective(samples[s].eigenvalues, powers, 0, 1.0, used, total);
    per_sample[s] = total / tuples;
  }
  // For a plain mean the delete-one jackknife reproduces the textbook
  // standard error exactly.
  return mean_with_error(per_sample);
}

Estimate top_eigenvalue_ratio(std::span<const SpectrumSample> samples) {
  require_uniform(samples);
  const std::size_t count = samples.size();
  const double n = static_cast<double>(samples.front().eigenvalues.size());
  std::vector<double> top(count);
  std::vector<double> average(count);
  for (std::size_t i = 0; i < count; ++i) {
    double max_square = 0.0;
    double sum_squares = 0.0;
    for (double x : samples[i].eigenvalues) {
      max_square = std::max(max_square, x * x);
      sum_squares += x * x;
    }
    top[i] = max_square;
    average[i] = sum_squares / n;
  }
  const double total_top = std::accumulate(top.begin(), top.end(), 0.0);
  const double total_average = std::accumulate(average.begin(), average.end(), 0.0);
  const double ratio = total_top / total_average;
  if (count < 2) return {ratio, 0.0};
  // Delete-one jackknife for the ratio of means.
  std::vector<double> leave_one_out(count);
  for (std::size_t i = 0; i < count; ++i) {
    leave_one_out[i] = (total_top - top[i]) / (total_average - average[i]);
  }
  const double jack_mean =
      std::accumulate(leave_one_out.begin(), leave_one_out.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - jack_mean) * (v - jack_mean);
  return {ratio, std::sqrt(ss * (count - 1.0) / count)};
}

Estimate top_eigenvalue_ratio(int n, std::size_t num_samples, std::uint64_t master_seed,
                              std::uint64_t stream, unsigned workers, SamplingRoute route) {
  SamplingPlan plan;
  plan.master_seed = master_seed;
  plan.stream = stream;
  plan.n = n;
  plan.num_samples = num_samples;
  plan.workers = workers;
  plan.ensemble = Ensemble::gue;
  plan.route = route;
  const auto batch = generate_spectra(plan);
  return top_eigenvalue_ratio(batch.samples);
}

}  // namespace fixtrace::sampler
