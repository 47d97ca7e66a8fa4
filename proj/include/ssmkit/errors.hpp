#pragma once

#include <stdexcept>
#include <string>

namespace ssm {

/// Configuration problems: bad fields, unknown keys, invalid specs.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Data ingestion problems: missing files, malformed rows, shape mismatches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failures: non-finite values, singular discretizations, diverged runs.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ssm
