#pragma once

#include <stdexcept>
#include <string>

namespace intsys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampling-based test could not evaluate its subject at any sampled point.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

/// Bad input to an operation (shape mismatch, non-positive tolerance, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace intsys
