#pragma once

#include <stdexcept>
#include <string>

namespace horizon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument lies outside the documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The model violates a condition a solver relies on.
class ValidityError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: the solver ran but could not deliver a result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NoBracket : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MonotonicityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace horizon
