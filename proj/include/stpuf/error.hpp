#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stpuf {

// Numeric values double as CLI exit codes and C API status codes.
enum class ErrorCategory : int {
  Argument = 2,
  Config = 3,
  Io = 4,
  GateStalled = 5,
  CalibrationRange = 6,
  CalibrationInfeasible = 7,
  Protocol = 8,
  Internal = 9,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& message) {
  throw Error(c, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCategory::Argument, message);
}

}  // namespace stpuf
