#pragma once

#include <stdexcept>
#include <string>

namespace pqs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input data: bad mesh parameters, exponents outside C+, mixed-sign weights.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a discretization do not.
class MeshMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative routine exhausted its budget or lost its bracket.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A solver precondition (case hypothesis, projectability) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace pqs
