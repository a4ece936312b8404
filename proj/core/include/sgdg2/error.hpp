#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgdg2 {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  invalid_batch,
  numeric_overflow,
  singular_system,
  format_error,
  truncated,
  io_error,
  enumeration_limit,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure raised by sgdg2 carries a code so
/// callers can map it (e.g. the CLI maps numeric_overflow to a diverged run).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sgdg2
