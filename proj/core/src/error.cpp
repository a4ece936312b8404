#include "sgdg2/error.hpp"

namespace sgdg2 {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::invalid_batch: return "invalid-batch";
    case ErrorCode::numeric_overflow: return "numeric-overflow";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::format_error: return "format-error";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::enumeration_limit: return "enumeration-limit";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sgdg2
