#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace infrisk {

enum class ErrorCode {
  validation,         // input value outside its domain
  schema_mismatch,    // id not declared by the model or schema
  configuration,      // model/schema configuration is incomplete
  degenerate_design,  // weighted design matrix cannot be factorized
  parse,              // malformed document
  not_found,
  conflict,           // state does not allow the operation
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. `details` carries one entry per violation so
/// callers can report every problem at once rather than the first.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace infrisk
