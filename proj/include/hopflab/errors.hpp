#pragma once

#include <stdexcept>
#include <string>

namespace hopflab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad flags, descriptors or config keys. CLI exit code 2.
struct UsageError : Error {
  using Error::Error;
};

/// A documented operation contract was violated by the caller or the input
/// map (for example a non-harmonic map handed to a harmonic-only verifier).
struct PreconditionError : Error {
  using Error::Error;
};

/// Numerical-quality failures. CLI exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

struct CalibrationError : NumericalError {
  using NumericalError::NumericalError;
};

struct StagnationError : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateFrameError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace hopflab
