#pragma once

#include <stdexcept>
#include <string>

namespace pyrfuse {

/// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated files: bad magic, unknown dtype/version, length mismatch.
struct FormatError : Error {
  using Error::Error;
};

/// Filesystem failures (open/read/write).
struct IoError : Error {
  using Error::Error;
};

/// Dimension, channel-count, band-index, or size violations.
struct ShapeError : Error {
  using Error::Error;
};

/// Caller-supplied values outside the documented domain.
struct ValueError : Error {
  using Error::Error;
};

/// Degenerate numeric conditions: zero variance, zero band mean, non-finite values.
struct NumericError : Error {
  using Error::Error;
};

/// Gradient requested for a tensor that is not on the tape.
struct LookupError : Error {
  using Error::Error;
};

}  // namespace pyrfuse
