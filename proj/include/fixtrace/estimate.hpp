#pragma once

namespace fixtrace {

// A Monte Carlo (or other noisy) estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

}  // namespace fixtrace
