#pragma once

#include <stdexcept>
#include <string>

namespace uavmeta {

/// Raised when a scenario description is rejected (bad value, unknown key, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine cannot reach its requested tolerance.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uavmeta
