#pragma once

#include <stdexcept>
#include <string>

namespace zsl {

// Error categories map onto the CLI exit codes: usage errors exit 1,
// data errors exit 2, numeric failures exit 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zsl
