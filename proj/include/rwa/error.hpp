#pragma once

#include <stdexcept>
#include <string>

namespace rwa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a type invariant (non-positive alpha, k < 2, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A configured enumeration or order cap was exceeded.
class CapExceeded : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Floating point trouble: underflow that survives retries, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Density evaluated where it is unbounded (boundary point with some alpha < 1).
class InfiniteDensity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Complex argument lies on (or too close to) the support of a Stieltjes transform.
class BranchCutError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail_parameter(const std::string& what) {
  throw InvalidParameter(what);
}

inline void require(bool cond, const char* what) {
  if (!cond) fail_parameter(what);
}

}  // namespace detail
}  // namespace rwa
