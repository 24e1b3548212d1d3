#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qfconv {

/// Precondition or invariant violation on an input value.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A ratio whose denominator vanishes (e.g. SNR with N == DC).
class DegenerateDenominator : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Generic numerical failure (no crossing in range, singular design, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonlinear fit that did not converge; carries the best parameters seen.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, std::vector<double> best_params)
      : NumericalError(what), best_params_(std::move(best_params)) {}

  const std::vector<double>& best_params() const noexcept { return best_params_; }

 private:
  std::vector<double> best_params_;
};

}  // namespace qfconv
