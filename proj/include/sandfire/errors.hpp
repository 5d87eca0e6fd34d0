#pragma once

#include <stdexcept>
#include <string>

namespace sandfire {

// Invalid configuration, flags, or input schema. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data; the message names the offending row and column.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Filesystem failure. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough usable data for a fit or test. Maps to CLI exit code 4.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Statistic undefined for the given input (zero variance and the like).
class UndefinedStatisticError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

}  // namespace sandfire
