#pragma once

#include <stdexcept>
#include <string>

namespace samix {

// Bad command line / config: CLI exit code 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data: CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Oracle / subprocess protocol failure: CLI exit code 3.
struct OracleError : std::runtime_error {
  explicit OracleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace samix
