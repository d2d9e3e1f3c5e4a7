#pragma once

#include <stdexcept>
#include <string>

namespace har {

/// Raised when a dataset is missing, incomplete, or unreadable on disk.
class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised for malformed file contents (carries file + line context in the message).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a config file fails schema validation or names unknown options.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when pair-set construction is infeasible for a discrimination class.
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a declared-frozen block changed during training. Aborts the run.
class FreezeViolation : public std::runtime_error {
 public:
  explicit FreezeViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace har
