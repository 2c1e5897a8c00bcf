#include "infrisk/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "infrisk/error.hpp"
#include "json_util.hpp"

namespace infrisk {

ModelKind kind_of(const RiskModel& model) noexcept {
  return std::holds_alternative<LogisticModel>(model) ? ModelKind::logistic : ModelKind::sti_product;
}

const std::string& schema_id_of(const RiskModel& model) noexcept {
  return std::visit([](const auto& m) -> const std::string& { return m.schema_id; }, model);
}

int version_of(const RiskModel& model) noexcept {
  return std::visit([](const auto& m) { return m.version; }, model);
}

void set_version(RiskModel& model, int version) noexcept {
  std::visit([version](auto& m) { m.version = version; }, model);
}

namespace {

template <typename M>
void read_header(detail::FieldReader& r, M& m) {
  if (auto v = r.string("model_id")) m.model_id = *v;
  if (auto v = r.string("schema_id")) m.schema_id = *v;
  if (auto v = r.integer("version")) m.version = static_cast<int>(*v);
  m.note = r.string("note", false).value_or("");
}

template <typename M>
void write_header(nlohmann::json& doc, const M& m, std::string_view kind) {
  doc["format_version"] = kModelFormatVersion;
  doc["model_kind"] = kind;
  doc["model_id"] = m.model_id;
  doc["schema_id"] = m.schema_id;
  doc["version"] = m.version;
  if (!m.note.empty()) doc["note"] = m.note;
}

LogisticModel read_logistic(detail::FieldReader& r, std::vector<std::string>& errors) {
  LogisticModel m;
  read_header(r, m);
  if (auto v = r.number("intercept")) m.intercept = *v;
  m.main_coefs = detail::read_number_map(r.object("main_coefs"), "model.main_coefs", errors);
  if (const auto* arr = r.array("interaction_coefs", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      detail::FieldReader ir((*arr)[i], "model.interaction_coefs[" + std::to_string(i) + "]", errors);
      FeaturePair pair;
      if (const auto* f = ir.array("features")) {
        if (f->size() == 2 && (*f)[0].is_string() && (*f)[1].is_string()) {
          pair = {(*f)[0].get<std::string>(), (*f)[1].get<std::string>()};
        } else {
          ir.fail_key("features", "expected [feature, feature]");
        }
      }
      const double coef = ir.number("coef").value_or(0.0);
      ir.finish();
      if (!m.interaction_coefs.emplace(pair, coef).second) {
        errors.push_back(ir.path() + ": duplicate interaction " + pair.name());
      }
    }
  }
  if (const auto* n = r.object("noise", false)) {
    detail::FieldReader nr(*n, "model.noise", errors);
    if (auto mode = nr.string("mode")) {
      if (*mode == "deterministic") m.noise.mode = NoiseMode::deterministic;
      else if (*mode == "monte-carlo") m.noise.mode = NoiseMode::monte_carlo;
      else nr.fail_key("mode", "expected deterministic or monte-carlo");
    }
    m.noise.std_dev = nr.number("std_dev", false).value_or(0.0);
    if (const auto* seed = nr.get("seed", false)) {
      if (seed->is_number_unsigned()) m.noise.seed = seed->get<std::uint64_t>();
      else if (seed->is_number_integer() && seed->get<std::int64_t>() >= 0) m.noise.seed = seed->get<std::uint64_t>();
      else nr.fail_key("seed", "must be a nonnegative integer");
    }
    m.noise.samples = static_cast<int>(nr.integer("samples", false).value_or(1000));
    nr.finish();
  }
  for (auto& v : check_logistic_model(m)) errors.push_back("model: " + v);
  return m;
}

StiProductModel read_sti(detail::FieldReader& r, std::vector<std::string>& errors) {
  StiProductModel m;
  read_header(r, m);
  if (auto v = r.number("base_prevalence")) m.base_prevalence = *v;
  m.attribute_lr = detail::read_number_map(r.object("attribute_lr"), "model.attribute_lr", errors);
  m.transmission = detail::read_number_map(r.object("transmission"), "model.transmission", errors);
  m.modifiers = detail::read_number_map(r.object("modifiers"), "model.modifiers", errors);
  for (auto& v : check_sti_model(m)) errors.push_back("model: " + v);
  return m;
}

}  // namespace

RiskModel model_from_json(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  detail::FieldReader r(doc, "model", errors);
  if (!r.ok_object()) throw Error(ErrorCode::parse, "invalid model document", errors);

  if (auto v = r.integer("format_version")) {
    if (*v != kModelFormatVersion) r.fail_key("format_version", "unsupported version " + std::to_string(*v));
  }
  r.object("fit_diagnostics", false);
  const auto kind = r.string("model_kind");
  RiskModel model;
  if (kind && *kind == "logistic") {
    model = read_logistic(r, errors);
  } else if (kind && *kind == "sti_product") {
    model = read_sti(r, errors);
  } else if (kind) {
    r.fail_key("model_kind", "expected sti_product or logistic, got '" + *kind + "'");
  }
  r.finish();
  if (!errors.empty()) {
    const std::string msg = "model document has " + std::to_string(errors.size()) + " violation(s)";
    throw Error(ErrorCode::parse, msg, std::move(errors));
  }
  return model;
}

RiskModel parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, "model is not valid JSON", {e.what()});
  }
  return model_from_json(doc);
}

RiskModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

nlohmann::json model_to_json(const RiskModel& model) {
  nlohmann::json doc;
  if (const auto* m = std::get_if<LogisticModel>(&model)) {
    write_header(doc, *m, "logistic");
    doc["intercept"] = m->intercept;
    doc["main_coefs"] = m->main_coefs;
    doc["interaction_coefs"] = nlohmann::json::array();
    for (const auto& [pair, coef] : m->interaction_coefs) {
      doc["interaction_coefs"].push_back({{"features", {pair.first, pair.second}}, {"coef", coef}});
    }
    doc["noise"] = {
        {"mode", m->noise.mode == NoiseMode::deterministic ? "deterministic" : "monte-carlo"},
        {"std_dev", m->noise.std_dev},
        {"seed", m->noise.seed},
        {"samples", m->noise.samples},
    };
  } else {
    const auto& s = std::get<StiProductModel>(model);
    write_header(doc, s, "sti_product");
    doc["base_prevalence"] = s.base_prevalence;
    doc["attribute_lr"] = s.attribute_lr;
    doc["transmission"] = s.transmission;
    doc["modifiers"] = s.modifiers;
  }
  return doc;
}

std::string serialize_model(const RiskModel& model) { return model_to_json(model).dump(2) + "\n"; }

std::vector<std::string> check_model_against_schema(const RiskModel& model,
                                                    const QuestionnaireSchema& schema) {
  std::vector<std::string> v;
  if (kind_of(model) != schema.model_kind) {
    v.push_back("model kind " + std::string(to_string(kind_of(model))) + " does not serve a " +
                std::string(to_string(schema.model_kind)) + " schema");
    return v;
  }
  if (!schema_id_of(model).empty() && schema_id_of(model) != schema.id) {
    v.push_back("model is for schema '" + schema_id_of(model) + "', not '" + schema.id + "'");
  }
  if (const auto* m = std::get_if<LogisticModel>(&model)) {
    const auto ids = schema.feature_ids();
    const std::set<std::string> declared(ids.begin(), ids.end());
    for (const auto& f : declared) {
      if (!m->main_coefs.count(f)) v.push_back("model lacks a coefficient for feature '" + f + "'");
    }
    for (const auto& [f, _] : m->main_coefs) {
      if (!declared.count(f)) v.push_back("model feature '" + f + "' is not in the schema");
    }
    const std::set<FeaturePair> pairs(schema.interaction_pairs.begin(), schema.interaction_pairs.end());
    for (const auto& p : pairs) {
      if (!m->interaction_coefs.count(p)) v.push_back("model lacks interaction " + p.name());
    }
    for (const auto& [p, _] : m->interaction_coefs) {
      if (!pairs.count(p)) v.push_back("model interaction " + p.name() + " is not in the schema");
    }
    return v;
  }
  const auto& s = std::get<StiProductModel>(model);
  for (const auto& q : schema.questions) {
    switch (q.role) {
      case QuestionRole::contact_type:
        for (const auto& o : q.options) {
          if (!s.transmission.count(o.value)) v.push_back("model has no transmission for contact type '" + o.value + "'");
        }
        break;
      case QuestionRole::partner_attribute:
        if (!s.attribute_lr.count(*q.feature)) v.push_back("model has no likelihood ratio for '" + *q.feature + "'");
        break;
      case QuestionRole::modifier:
        if (!s.modifiers.count(*q.feature)) v.push_back("model has no modifier '" + *q.feature + "'");
        break;
      default:
        break;
    }
  }
  return v;
}

}  // namespace infrisk
