#pragma once

#include <stdexcept>
#include <string>

namespace rimnoise {

/// Invalid parameters, inconsistent configuration or malformed input files.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Failure while running a valid request (I/O, numerical breakdown, missing data).
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace detail
}  // namespace rimnoise
