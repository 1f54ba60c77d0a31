#pragma once

#include <stdexcept>
#include <string>

namespace srcrb {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unsupported parameter combination (e.g. a Bessel order outside the table).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation precondition violated by the caller (shape, overdeterminedness).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative or quadrature routine did not reach its accuracy target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A generator could not produce the requested node set.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Fisher information too close to singular to invert.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double lambda_min)
      : Error(what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

/// Lattice-sum truncation error estimate above tolerance.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double tail_estimate)
      : Error(what), tail_estimate_(tail_estimate) {}
  double tail_estimate() const noexcept { return tail_estimate_; }

 private:
  double tail_estimate_;
};

}  // namespace srcrb
