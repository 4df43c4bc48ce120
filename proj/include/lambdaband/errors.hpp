#pragma once

#include <stdexcept>

namespace lambdaband {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A bracketing or bisection loop hit its iteration cap. Indicates a bug, not bad data.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point estimator (or a bootstrap built on one) could not produce a usable value.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Files that cannot be opened or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lambdaband
