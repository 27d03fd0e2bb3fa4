#pragma once

#include <stdexcept>
#include <string>

namespace stiq {

// Precondition and configuration violations are reported as
// std::invalid_argument. The two types below cover the remaining failure
// classes the command-line tool distinguishes by exit code.

/// Malformed or inconsistent input document (CSV, checkpoint).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation produced or received a non-finite value.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stiq
