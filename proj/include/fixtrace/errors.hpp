#pragma once

#include <stdexcept>
#include <string>

namespace fixtrace {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A tabulated object disagrees with its declared invariants (e.g. mass).
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Monte Carlo generation failed (eigensolver breakdown, degenerate draw).
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical scheme drifted beyond its accuracy contract.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fixtrace
