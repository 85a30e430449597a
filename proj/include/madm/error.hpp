#pragma once

#include <stdexcept>
#include <string>

namespace madm {

// Base of every error raised by the library. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Missing capability, unknown key, malformed value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced by a score or drift evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The diffused empirical measure collapses to atoms when sigma_t = 0.
class DegenerateMixtureError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A C-bound failed to dominate the line integrand.
class BoundViolationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The two-coin loop hit its safety cap without deciding.
class NonTerminationError : public NumericalError {
 public:
  NonTerminationError(const std::string& what, unsigned long long rounds,
                      double log_h, double bound)
      : NumericalError(what), rounds_(rounds), log_h_(log_h), bound_(bound) {}

  unsigned long long rounds() const noexcept { return rounds_; }
  double log_h() const noexcept { return log_h_; }
  double bound() const noexcept { return bound_; }

 private:
  unsigned long long rounds_;
  double log_h_;
  double bound_;
};

}  // namespace madm
