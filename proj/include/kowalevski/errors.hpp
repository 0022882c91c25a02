#pragma once

#include <stdexcept>
#include <string>

namespace kowalevski {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the arguments fails: zero denominator, degenerate pair,
// point outside the domain of a map.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Separated coordinates where some radicand is negative. what() lists the
// violated radicands.
class AdmissibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A complex evaluation that should be real has a large imaginary part.
class RealityViolation : public Error {
 public:
  using Error::Error;
};

// A chosen sign assignment of the radicals does not give a point of the
// expected subsystem.
class BranchError : public Error {
 public:
  using Error::Error;
};

// Integration or root finding failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed user input (configuration files, command line).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace kowalevski
