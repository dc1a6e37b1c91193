#pragma once

#include <stdexcept>
#include <string>

namespace lsam {

// Base class for all typed errors raised by the library. The CLI maps
// these to exit code 1; anything else is a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shapes disagree with an operation's contract.
struct ShapeError : Error {
  using Error::Error;
};

// NaN/Inf reached a computation that requires finite values.
struct NumericError : Error {
  using Error::Error;
};

// Malformed input data (CSV parsing, schema violations, bad subsets).
struct DataError : Error {
  using Error::Error;
};

// Invalid configuration values.
struct ConfigError : Error {
  using Error::Error;
};

// Optimization failure (divergence, empty training split).
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace lsam
