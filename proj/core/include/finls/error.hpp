#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace finls {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on argument shape or representation was violated.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Model parameters or configuration failed admissibility checks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Time stepping produced a non-finite state.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// A fixed-point iteration diverged, stalled or collapsed.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> residual_history)
      : Error(what), history_(std::move(residual_history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Reference quantities (e.g. a ground state) are unusable for a ratio.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Not enough trajectory samples for the requested analysis.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The dispersive window reaches the periodic boundary.
class WindowTooLong : public Error {
 public:
  using Error::Error;
};

}  // namespace finls
