#pragma once

#include <stdexcept>
#include <string>

namespace ssldyn {

// Error taxonomy. The CLI maps these onto exit codes:
//   ValidationError (and subclasses) -> 2, DivergenceError -> 3, IoError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, contract violations, unsupported parameter combinations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An operation was called for the wrong model variant (e.g. a predictor-g
// routine on a state without g).
class ModeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A structural assumption required by an analysis routine does not hold
// (e.g. asymmetric matrices passed to the commutator-operator assembly).
class AssumptionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite state or norm blow-up during integration/training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long last_finite_step)
      : Error(what), last_finite_step_(last_finite_step) {}
  long last_finite_step() const { return last_finite_step_; }

 private:
  long last_finite_step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssldyn
