#pragma once

#include <stdexcept>
#include <string>

namespace lsmdp {

// Base for every error raised by the library. The CLI maps each subclass to
// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A computation left the representable floating-point range.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsmdp
