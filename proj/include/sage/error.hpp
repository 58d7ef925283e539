#pragma once

#include <stdexcept>

namespace sage {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between operands (empty inputs included).
struct DimensionError : Error {
  using Error::Error;
};

/// Non-finite or otherwise out-of-domain numeric input.
struct InvalidValueError : Error {
  using Error::Error;
};

/// API misuse: wrong role, missing argument, out-of-range index.
struct UsageError : Error {
  using Error::Error;
};

/// Invalid configuration values (files, hyperparameters, schedules).
struct ConfigError : Error {
  using Error::Error;
};

/// Policy is recognized but intentionally not implemented.
struct UnsupportedPolicyError : UsageError {
  using UsageError::UsageError;
};

}  // namespace sage
