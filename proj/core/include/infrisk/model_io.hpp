#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "infrisk/logistic_model.hpp"
#include "infrisk/schema.hpp"
#include "infrisk/sti_model.hpp"

namespace infrisk {

using RiskModel = std::variant<StiProductModel, LogisticModel>;

inline constexpr int kModelFormatVersion = 1;

ModelKind kind_of(const RiskModel& model) noexcept;
const std::string& schema_id_of(const RiskModel& model) noexcept;
int version_of(const RiskModel& model) noexcept;
void set_version(RiskModel& model, int version) noexcept;

/// Model documents carry a `model_kind` discriminator and `format_version`.
/// Unknown fields are rejected; an optional `fit_diagnostics` object is
/// accepted and ignored. Throws Error(parse) listing every violation.
RiskModel model_from_json(const nlohmann::json& doc);
RiskModel parse_model(std::string_view text);
RiskModel load_model_file(const std::filesystem::path& path);

nlohmann::json model_to_json(const RiskModel& model);
std::string serialize_model(const RiskModel& model);

/// Reasons the model cannot serve the schema; empty when compatible.
/// A logistic model must carry exactly the schema's features and
/// interaction pairs; a product model must cover every contact type,
/// partner attribute and modifier the schema can produce.
std::vector<std::string> check_model_against_schema(const RiskModel& model,
                                                    const QuestionnaireSchema& schema);

}  // namespace infrisk
