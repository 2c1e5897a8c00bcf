#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

namespace infrisk {

/// One questionnaire answer. `std::monostate` is an explicit "do not know";
/// JSON null on the wire.
using AnswerValue = std::variant<std::monostate, bool, double, std::string>;

inline bool is_unknown(const AnswerValue& v) noexcept {
  return std::holds_alternative<std::monostate>(v);
}

nlohmann::json answer_value_to_json(const AnswerValue& value);

/// Throws Error(parse) for arrays and objects.
AnswerValue answer_value_from_json(const nlohmann::json& j);

std::string describe(const AnswerValue& value);

}  // namespace infrisk
