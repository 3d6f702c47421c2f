#pragma once

#include <stdexcept>
#include <string>

namespace usdbf {

// Error categories map to CLI exit codes: config 2, data 3, numeric 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// File starts with the wrong magic bytes or version.
class BadMagicError : public DataError {
 public:
  explicit BadMagicError(const std::string& msg) : DataError(msg) {}
};

// File is shorter than its header claims.
class TruncatedError : public DataError {
 public:
  explicit TruncatedError(const std::string& msg) : DataError(msg) {}
};

// Declared dimensions are inconsistent or would overflow.
class DimensionError : public DataError {
 public:
  explicit DimensionError(const std::string& msg) : DataError(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace usdbf
