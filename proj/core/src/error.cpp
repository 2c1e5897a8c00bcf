#include "infrisk/error.hpp"

namespace infrisk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::degenerate_design: return "degenerate_design";
    case ErrorCode::parse: return "parse";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::vector<std::string> details)
    : std::runtime_error(message), code_(code), details_(std::move(details)) {}

}  // namespace infrisk
