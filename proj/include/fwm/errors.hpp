#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fwm {

/// Argument shape or domain mismatch (vector lengths, grid sizes, bad parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model evaluation produced a non-finite value.
class NumericRangeError : public std::range_error {
 public:
  NumericRangeError(const std::string& what, double offending_norm)
      : std::range_error(what), offending_norm_(offending_norm) {}
  double offending_norm() const { return offending_norm_; }

 private:
  double offending_norm_;
};

/// Nonlinear step solve failed after all retries.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> residual_history)
      : std::runtime_error(what), residuals_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration. `where` names the line or the field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace fwm
