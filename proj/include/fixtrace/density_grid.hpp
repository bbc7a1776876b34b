#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fixtrace {

// Shortest round-trip decimal representation; used for all text output so
// that files are byte-stable across runs.
std::string format_number(double value);

double trapezoid(std::span<const double> points, std::span<const double> values);

// A density tabulated on a strictly increasing abscissa, with a declared
// total mass. Construction validates the invariants; the object is
// immutable afterwards.
class DensityGrid {
 public:
  static constexpr double kDefaultTolerance = 1e-3;
  static constexpr double kUnchecked = std::numeric_limits<double>::infinity();

  DensityGrid(std::vector<double> points, std::vector<double> values, double mass,
              double tolerance = kDefaultTolerance, std::string kind = "density", int n = 0);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }
  double mass() const { return mass_; }
  double tolerance() const { return tolerance_; }
  const std::string& kind() const { return kind_; }
  int n() const { return n_; }
  std::size_t size() const { return points_.size(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  double trapezoid_mass() const;

  // Linear interpolation; zero outside [front(), back()].
  double operator()(double x) const;

  // Same abscissae, scaled values, new declared mass.
  DensityGrid rescaled(double factor, double new_mass, std::string kind) const;

  // `# mass=<m> N=<N> kind=<tag>` followed by `x,density` rows.
  void write_csv(std::ostream& out) const;
  static DensityGrid read_csv(std::istream& in);

 private:
  std::vector<double> points_;
  std::vector<double> values_;
  double mass_;
  double tolerance_;
  std::string kind_;
  int n_;
};

// Three-column overlay `x,estimated,reference` with metadata comment lines.
void write_overlay_csv(std::ostream& out, std::span<const double> x,
                       std::span<const double> estimated, std::span<const double> reference,
                       const std::vector<std::string>& header_lines);

}  // namespace fixtrace
