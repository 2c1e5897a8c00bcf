#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "infrisk/answer_value.hpp"
#include "infrisk/feature_vector.hpp"
#include "infrisk/schema.hpp"

namespace infrisk {

/// A respondent's answers keyed by question id.
struct AnswerSet {
  std::string schema_id;
  std::map<std::string, AnswerValue> answers;
  std::optional<std::string> timestamp;

  bool operator==(const AnswerSet&) const = default;
};

AnswerSet answer_set_from_json(const nlohmann::json& doc);
AnswerSet parse_answer_set(std::string_view text);
nlohmann::json answer_set_to_json(const AnswerSet& answers);

/// Checks every answer against the schema and fills defaults for the
/// unanswered: checkbox unchecked, tri-state unknown, dropdown reference
/// option, slider default. The result has one entry per question.
/// Throws Error(validation) listing every offending question id.
AnswerSet validate_answers(const QuestionnaireSchema& schema, const AnswerSet& answers);

/// True when the section has no gate or its gate condition holds.
bool section_open(const QuestionnaireSchema& schema, const AnswerSet& validated,
                  const Section& section);

/// Encodes validated answers. Questions in a closed section encode as zeros.
/// Interaction products are not materialized here.
FeatureVector encode_features(const QuestionnaireSchema& schema, const AnswerSet& validated);

}  // namespace infrisk
