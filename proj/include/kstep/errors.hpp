#pragma once

#include <stdexcept>
#include <string>

namespace kstep {

// Bad input: malformed data, out-of-range parameters, inconsistent config.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A belief matrix with mass above the superdiagonal.
class StructureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A value outside its admissible interval (negative probability, etc).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Operation undefined for the given arguments (k < 2, empty plays, ...).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failure while running (non-finite sampler state, I/O).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kstep
