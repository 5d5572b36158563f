#ifndef INCH_ERRORS_HPP
#define INCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace inch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold (e.g. kappa
// smaller than an achievable out-rate).
struct PreconditionViolation : Error {
  using Error::Error;
};

// Transition covariance is not positive definite (underflowed dt*v etc.).
struct DegenerateCovariance : Error {
  using Error::Error;
};

// A prior rate bound is infinite, so no fixed kappa dominates the rates.
struct UnboundedPrior : Error {
  using Error::Error;
};

// Enumeration size guard exceeded (brute-force likelihood).
struct TooLarge : Error {
  using Error::Error;
};

// Per-interval sequence count n^(M-1) exceeds the configured guard.
struct TooManySwitches : Error {
  using Error::Error;
};

struct SequenceLengthMismatch : Error {
  using Error::Error;
};

// A likelihood evaluated to exactly zero (degenerate input).
struct NumericalUnderflow : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct NonMonotoneTime : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace inch

#endif
