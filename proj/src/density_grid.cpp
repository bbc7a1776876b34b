#include "fixtrace/density_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fixtrace/errors.hpp"

namespace fixtrace {

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double trapezoid(std::span<const double> points, std::span<const double> values) {
  if (points.size() != values.size()) throw DomainError("trapezoid: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    sum += 0.5 * (points[i] - points[i - 1]) * (values[i] + values[i - 1]);
  }
  return sum;
}

DensityGrid::DensityGrid(std::vector<double> points, std::vector<double> values, double mass,
                         double tolerance, std::string kind, int n)
    : points_(std::move(points)),
      values_(std::move(values)),
      mass_(mass),
      tolerance_(tolerance),
      kind_(std::move(kind)),
      n_(n) {
  if (points_.size() < 2) throw InconsistencyError("DensityGrid: need at least two points");
  if (points_.size() != values_.size()) {
    throw InconsistencyError("DensityGrid: points and values differ in length");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i]) || !std::isfinite(values_[i])) {
      throw InconsistencyError("DensityGrid: non-finite entry at index " + std::to_string(i));
    }
    if (values_[i] < 0.0) {
      throw InconsistencyError("DensityGrid: negative value at index " + std::to_string(i));
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw InconsistencyError("DensityGrid: abscissae not strictly increasing at index " +
                               std::to_string(i));
    }
  }
  if (!(mass_ > 0.0)) throw InconsistencyError("DensityGrid: declared mass must be positive");
  if (std::isfinite(tolerance_)) {
    const double actual = trapezoid_mass();
    if (std::abs(actual - mass_) > tolerance_ * mass_) {
      throw InconsistencyError("DensityGrid(" + kind_ + "): integral " + format_number(actual) +
                               " differs from declared mass " + format_number(mass_));
    }
  }
}

double DensityGrid::trapezoid_mass() const { return trapezoid(points_, values_); }

double DensityGrid::operator()(double x) const {
  if (!(x >= points_.front() && x <= points_.back())) return 0.0;
  const auto upper = std::upper_bound(points_.begin(), points_.end(), x);
  if (upper == points_.end()) return values_.back();
  const std::size_t hi = static_cast<std::size_t>(upper - points_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - points_[lo]) / (points_[hi] - points_[lo]);
  return values_[lo] + t * (values_[hi] - values_[lo]);
}

DensityGrid DensityGrid::rescaled(double factor, double new_mass, std::string kind) const {
  std::vector<double> scaled(values_);
  for (double& v : scaled) v *= factor;
  return DensityGrid(points_, std::move(scaled), new_mass, tolerance_, std::move(kind), n_);
}

void DensityGrid::write_csv(std::ostream& out) const {
  out << "# mass=" << format_number(mass_) << " N=" << n_ << " kind=" << kind_ << "\n";
  out << "x,density\n";
  for (std::size_t i = 0; i < points_.size(); ++i) {
    out << format_number(points_[i]) << ',' << format_number(values_[i]) << "\n";
  }
}

DensityGrid DensityGrid::read_csv(std::istream& in) {
  double mass = 0.0;
  int n = 0;
  std::string kind = "density";
  std::vector<double> points;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream fields(line.substr(1));
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "mass") mass = std::stod(value);
        if (key == "N") n = std::stoi(value);
        if (key == "kind") kind = value;
      }
      continue;
    }
    if (line.rfind("x,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InconsistencyError("DensityGrid CSV: malformed row");
    points.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return DensityGrid(std::move(points), std::move(values), mass, kDefaultTolerance,
                     std::move(kind), n);
}

void write_overlay_csv(std::ostream& out, std::span<const double> x,
                       std::span<const double> estimated, std::span<const double> reference,
                       const std::vector<std::string>& header_lines) {
  if (x.size() != estimated.size() || x.size() != reference.size()) {
    throw DomainError("write_overlay_csv: column length mismatch");
  }
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "x,estimated,reference\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << format_number(x[i]) << ',' << format_number(estimated[i]) << ','
        << format_number(reference[i]) << "\n";
  }
}

}  // namespace fixtrace
