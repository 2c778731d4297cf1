#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polishkrige {

/// Machine-readable failure class. The CLI prints the tag as the first token
/// of its error line, so the spellings are part of the external interface.
enum class ErrorCategory {
  io,
  parse,
  invalid_argument,
  invalid_grid,
  duplicate_location,
  singular_system,
  out_of_range,
  bad_model,
};

constexpr std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::invalid_argument: return "invalid-argument";
    case ErrorCategory::invalid_grid: return "invalid-grid";
    case ErrorCategory::duplicate_location: return "duplicate-location";
    case ErrorCategory::singular_system: return "singular-system";
    case ErrorCategory::out_of_range: return "out-of-range";
    case ErrorCategory::bad_model: return "bad-model";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Raised when a dense solve is numerically singular. Carries the reciprocal
/// condition estimate so callers can decide whether to regularize and retry.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& message, double rcond)
      : Error(ErrorCategory::singular_system, message), rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

}  // namespace polishkrige
