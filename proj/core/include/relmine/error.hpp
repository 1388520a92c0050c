#pragma once

#include <stdexcept>
#include <string>

namespace relmine {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration: invalid fold counts, degenerate synthesis specs,
/// missing files, contradictory options. CLI exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: schema violations, unparseable rows, label
/// conflicts, vocabulary mismatches. CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numeric failure: divergence during training, non-finite intermediates,
/// failed gradient checks. CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace relmine
