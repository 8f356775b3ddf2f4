#pragma once

#include <stdexcept>
#include <string>

namespace maxcf {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimension, bad parameter, empty grid and the like.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Argument outside the set on which the quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition that is not a plain argument check
/// (e.g. a generator that is not unit-mean).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Quadrature, extrapolation or solver did not reach its tolerance.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, double achieved_error = 0.0)
      : Error(what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Difference quotients requested on an evaluator whose noise would swamp
/// the step.
class NoiseDominatesStep : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// Iteration that failed to settle within its budget.
class Divergence : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

}  // namespace maxcf
