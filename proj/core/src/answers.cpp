#include "infrisk/answers.hpp"

#include "infrisk/error.hpp"
#include "json_util.hpp"

namespace infrisk {

AnswerSet answer_set_from_json(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  detail::FieldReader r(doc, "answers", errors);
  AnswerSet out;
  if (r.ok_object()) {
    if (auto v = r.string("schema_id", false)) out.schema_id = *v;
    out.timestamp = r.string("timestamp", false);
    if (const auto* a = r.object("answers")) {
      for (const auto& [qid, value] : a->items()) {
        try {
          out.answers.emplace(qid, answer_value_from_json(value));
        } catch (const Error& e) {
          errors.push_back("question '" + qid + "': " + e.what());
        }
      }
    }
    r.finish();
  }
  if (!errors.empty()) throw Error(ErrorCode::parse, "malformed answer set", std::move(errors));
  return out;
}

AnswerSet parse_answer_set(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, "answer set is not valid JSON", {e.what()});
  }
  return answer_set_from_json(doc);
}

nlohmann::json answer_set_to_json(const AnswerSet& a) {
  nlohmann::json doc;
  doc["schema_id"] = a.schema_id;
  doc["answers"] = nlohmann::json::object();
  for (const auto& [qid, v] : a.answers) doc["answers"][qid] = answer_value_to_json(v);
  if (a.timestamp) doc["timestamp"] = *a.timestamp;
  return doc;
}

AnswerSet validate_answers(const QuestionnaireSchema& schema, const AnswerSet& answers) {
  std::vector<std::string> errors;
  if (!answers.schema_id.empty() && answers.schema_id != schema.id) {
    errors.push_back("answers are for schema '" + answers.schema_id + "', not '" + schema.id + "'");
  }
  for (const auto& [qid, _] : answers.answers) {
    if (schema.find_question(qid) == nullptr) errors.push_back("unknown question '" + qid + "'");
  }

  AnswerSet out;
  out.schema_id = schema.id;
  out.timestamp = answers.timestamp;
  for (const auto& q : schema.questions) {
    auto it = answers.answers.find(q.id);
    if (it != answers.answers.end()) {
      if (auto why = domain_violation(q, it->second)) {
        errors.push_back("question '" + q.id + "': " + *why);
        continue;
      }
      out.answers.emplace(q.id, it->second);
      continue;
    }
    if (q.required) {
      errors.push_back("question '" + q.id + "': answer required");
      continue;
    }
    switch (q.widget) {
      case Widget::checkbox:
        out.answers.emplace(q.id, false);
        break;
      case Widget::tri_state:
        out.answers.emplace(q.id, std::monostate{});
        break;
      case Widget::dropdown: {
        const Option* reference = nullptr;
        for (const auto& o : q.options) {
          if (!o.feature) {
            reference = &o;
            break;
          }
        }
        if (reference == nullptr || q.role == QuestionRole::contact_type) {
          errors.push_back("question '" + q.id + "': answer required");
        } else {
          out.answers.emplace(q.id, reference->value);
        }
        break;
      }
      case Widget::slider:
        out.answers.emplace(q.id, q.bounds->default_value);
        break;
    }
  }
  if (!errors.empty()) {
    throw Error(ErrorCode::validation, "answers do not match schema '" + schema.id + "'",
                std::move(errors));
  }
  return out;
}

namespace {

bool section_open_depth(const QuestionnaireSchema& schema, const AnswerSet& validated,
                        const Section& section, int depth) {
  if (!section.gate) return true;
  if (depth > static_cast<int>(schema.sections.size())) return false;
  const auto* gate_q = schema.find_question(section.gate->question);
  if (gate_q == nullptr) return false;
  if (const auto* gs = schema.find_section(gate_q->section)) {
    if (!section_open_depth(schema, validated, *gs, depth + 1)) return false;
  }
  auto it = validated.answers.find(gate_q->id);
  return it != validated.answers.end() && it->second == section.gate->equals;
}

}  // namespace

bool section_open(const QuestionnaireSchema& schema, const AnswerSet& validated,
                  const Section& section) {
  return section_open_depth(schema, validated, section, 0);
}

FeatureVector encode_features(const QuestionnaireSchema& schema, const AnswerSet& validated) {
  FeatureVector fv;
  for (const auto& q : schema.questions) {
    const auto* sec = schema.find_section(q.section);
    const bool open = sec == nullptr || section_open(schema, validated, *sec);
    auto it = validated.answers.find(q.id);
    const AnswerValue value = it == validated.answers.end() ? AnswerValue{} : it->second;

    switch (q.widget) {
      case Widget::checkbox:
      case Widget::tri_state:
        if (!open) {
          fv.values[*q.feature] = 0.0;
        } else if (is_unknown(value)) {
          fv.unknown.insert(*q.feature);
        } else {
          fv.values[*q.feature] = std::get<bool>(value) ? 1.0 : 0.0;
        }
        break;
      case Widget::dropdown: {
        const auto* chosen = std::get_if<std::string>(&value);
        for (const auto& o : q.options) {
          if (!o.feature) continue;
          fv.values[*o.feature] = (open && chosen != nullptr && *chosen == o.value) ? 1.0 : 0.0;
        }
        break;
      }
      case Widget::slider: {
        double scaled = 0.0;
        if (open) {
          const double raw = std::get<double>(value);
          scaled = (raw - q.bounds->lo) / (q.bounds->hi - q.bounds->lo);
        }
        fv.values[*q.feature] = scaled;
        break;
      }
    }
  }
  return fv;
}

}  // namespace infrisk
