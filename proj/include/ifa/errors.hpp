#pragma once

#include <stdexcept>
#include <string>

namespace ifa {

// Base class for every error raised by the library.
struct IfaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible matrix shapes or a mis-sized argument.
struct DimensionError : IfaError {
  using IfaError::IfaError;
};

// Inconsistent model/training configuration, detected at construction time.
struct ConfigError : IfaError {
  using IfaError::IfaError;
};

// Malformed input data (dataset lines, out-of-vocabulary ids, label conflicts).
struct DataError : IfaError {
  using IfaError::IfaError;
};

// API misuse: stale caches, mismatched forward/backward calls, size guards.
struct UsageError : IfaError {
  using IfaError::IfaError;
};

// Training aborted (non-finite loss or gradient).
struct TrainingError : IfaError {
  using IfaError::IfaError;
};

// File system / serialization failures.
struct IoError : IfaError {
  using IfaError::IfaError;
};

}  // namespace ifa
