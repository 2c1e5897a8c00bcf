#include "infrisk/answer_value.hpp"

#include "infrisk/error.hpp"

namespace infrisk {

nlohmann::json answer_value_to_json(const AnswerValue& value) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      value);
}

AnswerValue answer_value_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::parse, "answer must be null, boolean, number or string");
}

std::string describe(const AnswerValue& value) {
  return answer_value_to_json(value).dump();
}

}  // namespace infrisk
