#include "infrisk/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "infrisk/error.hpp"
#include "json_util.hpp"

namespace infrisk {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view name, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [key, value] : table) {
    if (key == name) return value;
  }
  return std::nullopt;
}

constexpr std::pair<std::string_view, Widget> kWidgets[] = {
    {"checkbox", Widget::checkbox},
    {"dropdown", Widget::dropdown},
    {"slider", Widget::slider},
    {"tri-state", Widget::tri_state},
};
constexpr std::pair<std::string_view, Audience> kAudiences[] = {
    {"patient", Audience::patient},
    {"hospital", Audience::hospital},
    {"sanitary-inspection", Audience::sanitary_inspection},
};
constexpr std::pair<std::string_view, ModelKind> kModelKinds[] = {
    {"sti_product", ModelKind::sti_product},
    {"logistic", ModelKind::logistic},
};
constexpr std::pair<std::string_view, QuestionRole> kRoles[] = {
    {"feature", QuestionRole::feature},
    {"contact_type", QuestionRole::contact_type},
    {"partner_attribute", QuestionRole::partner_attribute},
    {"modifier", QuestionRole::modifier},
    {"repetitions", QuestionRole::repetitions},
};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [key, v] : table) {
    if (v == value) return key;
  }
  return "?";
}

bool is_binary(Widget w) { return w == Widget::checkbox || w == Widget::tri_state; }

Labels read_labels(detail::FieldReader& r, std::vector<std::string>& errors) {
  return detail::read_string_map(r.object("labels"), r.path() + ".labels", errors);
}

}  // namespace

std::string_view to_string(Widget w) noexcept { return name_of(w, kWidgets); }
std::string_view to_string(Audience a) noexcept { return name_of(a, kAudiences); }
std::string_view to_string(ModelKind k) noexcept { return name_of(k, kModelKinds); }
std::string_view to_string(QuestionRole r) noexcept { return name_of(r, kRoles); }

const Option* Question::find_option(std::string_view value) const {
  for (const auto& o : options) {
    if (o.value == value) return &o;
  }
  return nullptr;
}

std::vector<std::string> Question::features() const {
  std::vector<std::string> out;
  if (widget == Widget::dropdown) {
    for (const auto& o : options) {
      if (o.feature) out.push_back(*o.feature);
    }
  } else if (feature) {
    out.push_back(*feature);
  }
  return out;
}

std::vector<std::string> QuestionnaireSchema::feature_ids() const {
  std::vector<std::string> out;
  for (const auto& q : questions) {
    for (auto& f : q.features()) out.push_back(std::move(f));
  }
  return out;
}

const Question* QuestionnaireSchema::find_question(std::string_view qid) const {
  for (const auto& q : questions) {
    if (q.id == qid) return &q;
  }
  return nullptr;
}

const Section* QuestionnaireSchema::find_section(std::string_view sid) const {
  for (const auto& s : sections) {
    if (s.id == sid) return &s;
  }
  return nullptr;
}

const Question* QuestionnaireSchema::question_for_feature(std::string_view feature) const {
  for (const auto& q : questions) {
    for (const auto& f : q.features()) {
      if (f == feature) return &q;
    }
  }
  return nullptr;
}

std::optional<std::string> domain_violation(const Question& q, const AnswerValue& value) {
  if (is_unknown(value)) {
    if (q.allow_unknown) return std::nullopt;
    return "\"do not know\" is not allowed";
  }
  switch (q.widget) {
    case Widget::checkbox:
    case Widget::tri_state:
      if (std::holds_alternative<bool>(value)) return std::nullopt;
      return "expected true or false, got " + describe(value);
    case Widget::dropdown: {
      const auto* s = std::get_if<std::string>(&value);
      if (s == nullptr) return "expected one of the listed options, got " + describe(value);
      if (q.find_option(*s) == nullptr) return "value " + describe(value) + " is not among the options";
      return std::nullopt;
    }
    case Widget::slider: {
      const auto* d = std::get_if<double>(&value);
      if (d == nullptr) return "expected a number, got " + describe(value);
      if (!q.bounds) return "slider has no bounds";
      if (!(*d >= q.bounds->lo && *d <= q.bounds->hi)) {
        std::ostringstream os;
        os << "value " << *d << " outside [" << q.bounds->lo << ", " << q.bounds->hi << "]";
        return os.str();
      }
      return std::nullopt;
    }
  }
  return "unsupported widget";
}

std::vector<std::string> check_schema(const QuestionnaireSchema& s) {
  std::vector<std::string> v;
  auto fail = [&v](std::string msg) { v.push_back(std::move(msg)); };

  if (s.format_version != QuestionnaireSchema::kFormatVersion) {
    fail("format_version " + std::to_string(s.format_version) + " is not supported");
  }
  if (s.id.empty()) fail("schema id is empty");

  std::set<std::string> section_ids;
  for (const auto& sec : s.sections) {
    if (sec.id.empty()) fail("section with empty id");
    if (!section_ids.insert(sec.id).second) fail("duplicate section id '" + sec.id + "'");
    if (!sec.labels.count("pl")) fail("section '" + sec.id + "' lacks a Polish (pl) label");
  }

  std::set<std::string> question_ids;
  std::set<std::string> features;
  int contact_questions = 0;
  int repetition_questions = 0;
  for (const auto& q : s.questions) {
    const std::string where = "question '" + q.id + "'";
    if (q.id.empty()) fail("question with empty id");
    if (!question_ids.insert(q.id).second) fail("duplicate question id '" + q.id + "'");
    if (!section_ids.count(q.section)) fail(where + " references unknown section '" + q.section + "'");
    if (!q.labels.count("pl")) fail(where + " lacks a Polish (pl) label");

    auto add_feature = [&](const std::string& f) {
      if (f.empty()) fail(where + " declares an empty feature id");
      else if (!features.insert(f).second) fail("duplicate feature id '" + f + "'");
    };

    switch (q.widget) {
      case Widget::checkbox:
      case Widget::tri_state:
        if (!q.feature) fail(where + " needs a feature id");
        else add_feature(*q.feature);
        if (!q.options.empty()) fail(where + " is binary but lists options");
        if (q.bounds) fail(where + " is binary but declares bounds");
        if (q.widget == Widget::tri_state && !q.allow_unknown) {
          fail(where + " is tri-state and must allow \"do not know\"");
        }
        break;
      case Widget::dropdown: {
        if (q.options.size() < 2) fail(where + " dropdown needs at least 2 options");
        if (q.feature) fail(where + " dropdown declares features per option, not per question");
        if (q.bounds) fail(where + " dropdown declares bounds");
        std::set<std::string> values;
        int references = 0;
        for (const auto& o : q.options) {
          if (!values.insert(o.value).second) fail(where + " repeats option '" + o.value + "'");
          if (o.feature) add_feature(*o.feature);
          else ++references;
        }
        if (q.role == QuestionRole::contact_type) {
          if (references != static_cast<int>(q.options.size())) {
            fail(where + " contact-type options must not declare features");
          }
        } else if (references > 1) {
          fail(where + " has more than one reference option");
        }
        break;
      }
      case Widget::slider:
        if (!q.feature) fail(where + " needs a feature id");
        else add_feature(*q.feature);
        if (!q.options.empty()) fail(where + " slider lists options");
        if (!q.bounds) {
          fail(where + " slider needs bounds");
        } else {
          if (!(q.bounds->lo < q.bounds->hi)) fail(where + " slider bounds need min < max");
          if (!(q.bounds->default_value >= q.bounds->lo && q.bounds->default_value <= q.bounds->hi)) {
            fail(where + " slider default outside bounds");
          }
          if (q.bounds->step < 0) fail(where + " slider step is negative");
        }
        break;
    }

    if (q.allow_unknown && !is_binary(q.widget)) {
      fail(where + " allows \"do not know\" but only binary items support it");
    }
    if (q.allow_unknown && q.feature && !s.priors.count(*q.feature)) {
      fail(where + " allows \"do not know\" but feature '" + *q.feature + "' has no prior");
    }
    if (q.modifiable) {
      if (!q.protective) fail(where + " is modifiable but declares no protective value");
      else if (is_unknown(*q.protective)) fail(where + " protective value cannot be \"do not know\"");
      else if (auto why = domain_violation(q, *q.protective)) fail(where + " protective value: " + *why);
    } else if (q.protective) {
      fail(where + " declares a protective value but is not modifiable");
    }

    switch (q.role) {
      case QuestionRole::feature:
        if (s.model_kind == ModelKind::sti_product) fail(where + " needs a product-model role");
        break;
      case QuestionRole::contact_type:
        ++contact_questions;
        if (q.widget != Widget::dropdown) fail(where + " contact type must be a dropdown");
        break;
      case QuestionRole::partner_attribute:
      case QuestionRole::modifier:
        if (!is_binary(q.widget)) fail(where + " role requires a checkbox or tri-state");
        break;
      case QuestionRole::repetitions:
        ++repetition_questions;
        if (q.widget != Widget::slider) fail(where + " repetitions must be a slider");
        else if (q.bounds && q.bounds->lo < 1) fail(where + " repetitions must be at least 1");
        break;
    }
    if (q.role != QuestionRole::feature && s.model_kind == ModelKind::logistic) {
      fail(where + " role '" + std::string(to_string(q.role)) + "' is not valid in a logistic schema");
    }
  }
  if (s.model_kind == ModelKind::sti_product) {
    if (contact_questions != 1) fail("product-model schema needs exactly one contact-type question");
    if (repetition_questions > 1) fail("product-model schema has more than one repetitions question");
    if (!s.interaction_pairs.empty()) fail("product-model schema cannot declare interaction pairs");
  }

  std::set<FeaturePair> pairs;
  for (const auto& p : s.interaction_pairs) {
    const std::string name = "interaction pair (" + p.first + ", " + p.second + ")";
    for (const auto* f : {&p.first, &p.second}) {
      if (!features.count(*f)) fail(name + " references undeclared feature '" + *f + "'");
    }
    if (p.first == p.second) fail(name + " must reference two distinct features");
    if (pairs.count(p) || pairs.count(FeaturePair{p.second, p.first})) fail(name + " is declared twice");
    pairs.insert(p);
  }

  for (const auto& [f, prior] : s.priors) {
    if (!features.count(f)) fail("prior for undeclared feature '" + f + "'");
    if (!(prior >= 0.0 && prior <= 1.0)) fail("prior for '" + f + "' outside [0, 1]");
  }

  for (const auto& sec : s.sections) {
    if (!sec.gate) continue;
    const std::string where = "section '" + sec.id + "' gate";
    if (!sec.optional) fail(where + " requires the section to be optional");
    const auto* gq = s.find_question(sec.gate->question);
    if (gq == nullptr) {
      fail(where + " references unknown question '" + sec.gate->question + "'");
      continue;
    }
    if (gq->section == sec.id) fail(where + " cannot depend on a question inside the section");
    if (gq->widget == Widget::slider) fail(where + " cannot depend on a slider");
    if (auto why = domain_violation(*gq, sec.gate->equals)) fail(where + " value: " + *why);
  }

  const auto& b = s.bands;
  if (!(b.low > 0.0 && b.low < b.moderate && b.moderate < b.high && b.high <= 1.0)) {
    fail("band thresholds must satisfy 0 < low < moderate < high <= 1");
  }
  return v;
}

QuestionnaireSchema schema_from_json(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  QuestionnaireSchema s;
  detail::FieldReader root(doc, "schema", errors);
  if (!root.ok_object()) {
    throw Error(ErrorCode::parse, "invalid schema document", errors);
  }

  if (auto v = root.integer("format_version")) s.format_version = static_cast<int>(*v);
  if (auto v = root.string("id")) s.id = *v;
  if (auto v = root.string("audience")) {
    if (auto a = lookup(*v, kAudiences)) s.audience = *a;
    else root.fail_key("audience", "unknown audience '" + *v + "'");
  }
  if (auto v = root.string("model_kind")) {
    if (auto k = lookup(*v, kModelKinds)) s.model_kind = *k;
    else root.fail_key("model_kind", "unknown model kind '" + *v + "'");
  }
  s.labels = read_labels(root, errors);

  if (const auto* arr = root.array("sections")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      detail::FieldReader r((*arr)[i], "sections[" + std::to_string(i) + "]", errors);
      Section sec;
      if (auto v = r.string("id")) sec.id = *v;
      sec.labels = read_labels(r, errors);
      sec.optional = r.boolean("optional", false);
      if (const auto* g = r.object("gate", false)) {
        detail::FieldReader gr(*g, r.path() + ".gate", errors);
        SectionGate gate;
        if (auto v = gr.string("question")) gate.question = *v;
        if (const auto* eq = gr.get("equals", true)) {
          try {
            gate.equals = answer_value_from_json(*eq);
          } catch (const Error& e) {
            gr.fail_key("equals", e.what());
          }
        }
        gr.finish();
        sec.gate = std::move(gate);
      }
      r.finish();
      s.sections.push_back(std::move(sec));
    }
  }

  if (const auto* arr = root.array("questions")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      detail::FieldReader r((*arr)[i], "questions[" + std::to_string(i) + "]", errors);
      Question q;
      if (auto v = r.string("id")) q.id = *v;
      if (auto v = r.string("section")) q.section = *v;
      if (auto v = r.string("widget")) {
        if (auto w = lookup(*v, kWidgets)) q.widget = *w;
        else r.fail_key("widget", "unknown widget '" + *v + "'");
      }
      if (auto v = r.string("role", false)) {
        if (auto role = lookup(*v, kRoles)) q.role = *role;
        else r.fail_key("role", "unknown role '" + *v + "'");
      }
      q.labels = read_labels(r, errors);
      q.feature = r.string("feature", false);
      q.allow_unknown = r.boolean("allow_unknown", false);
      q.modifiable = r.boolean("modifiable", false);
      q.required = r.boolean("required", false);
      if (const auto* pv = r.get("protective", false)) {
        try {
          q.protective = answer_value_from_json(*pv);
        } catch (const Error& e) {
          r.fail_key("protective", e.what());
        }
      }
      if (const auto* opts = r.array("options", false)) {
        for (std::size_t k = 0; k < opts->size(); ++k) {
          detail::FieldReader orr((*opts)[k], r.path() + ".options[" + std::to_string(k) + "]", errors);
          Option o;
          if (auto v = orr.string("value")) o.value = *v;
          o.labels = read_labels(orr, errors);
          o.feature = orr.string("feature", false);
          orr.finish();
          q.options.push_back(std::move(o));
        }
      }
      if (const auto* b = r.object("bounds", false)) {
        detail::FieldReader br(*b, r.path() + ".bounds", errors);
        SliderBounds bounds;
        if (auto v = br.number("min")) bounds.lo = *v;
        if (auto v = br.number("max")) bounds.hi = *v;
        bounds.step = br.number("step", false).value_or(0.0);
        bounds.default_value = br.number("default", false).value_or(bounds.lo);
        br.finish();
        q.bounds = bounds;
      }
      r.finish();
      s.questions.push_back(std::move(q));
    }
  }

  if (const auto* arr = root.array("interaction_pairs", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto& p = (*arr)[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
        errors.push_back("schema.interaction_pairs[" + std::to_string(i) + "]: expected [feature, feature]");
        continue;
      }
      s.interaction_pairs.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
    }
  }
  s.priors = detail::read_number_map(root.object("priors", false), "schema.priors", errors);
  if (const auto* b = root.object("bands", false)) {
    detail::FieldReader br(*b, "schema.bands", errors);
    if (auto v = br.number("low")) s.bands.low = *v;
    if (auto v = br.number("moderate")) s.bands.moderate = *v;
    if (auto v = br.number("high")) s.bands.high = *v;
    br.finish();
  }
  root.finish();

  for (auto& msg : check_schema(s)) errors.push_back(std::move(msg));
  if (!errors.empty()) {
    const std::string msg = "schema '" + s.id + "' has " + std::to_string(errors.size()) + " violation(s)";
    throw Error(ErrorCode::parse, msg, std::move(errors));
  }
  return s;
}

QuestionnaireSchema parse_schema(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, "schema is not valid JSON", {e.what()});
  }
  return schema_from_json(doc);
}

nlohmann::json schema_to_json(const QuestionnaireSchema& s) {
  nlohmann::json doc;
  doc["format_version"] = s.format_version;
  doc["id"] = s.id;
  doc["audience"] = to_string(s.audience);
  doc["model_kind"] = to_string(s.model_kind);
  doc["labels"] = s.labels;
  doc["sections"] = nlohmann::json::array();
  for (const auto& sec : s.sections) {
    nlohmann::json j{{"id", sec.id}, {"labels", sec.labels}, {"optional", sec.optional}};
    if (sec.gate) {
      j["gate"] = {{"question", sec.gate->question}, {"equals", answer_value_to_json(sec.gate->equals)}};
    }
    doc["sections"].push_back(std::move(j));
  }
  doc["questions"] = nlohmann::json::array();
  for (const auto& q : s.questions) {
    nlohmann::json j{
        {"id", q.id},
        {"section", q.section},
        {"widget", to_string(q.widget)},
        {"role", to_string(q.role)},
        {"labels", q.labels},
        {"allow_unknown", q.allow_unknown},
        {"modifiable", q.modifiable},
        {"required", q.required},
    };
    if (q.feature) j["feature"] = *q.feature;
    if (q.protective) j["protective"] = answer_value_to_json(*q.protective);
    if (!q.options.empty()) {
      j["options"] = nlohmann::json::array();
      for (const auto& o : q.options) {
        nlohmann::json oj{{"value", o.value}, {"labels", o.labels}};
        if (o.feature) oj["feature"] = *o.feature;
        j["options"].push_back(std::move(oj));
      }
    }
    if (q.bounds) {
      j["bounds"] = {{"min", q.bounds->lo},
                     {"max", q.bounds->hi},
                     {"step", q.bounds->step},
                     {"default", q.bounds->default_value}};
    }
    doc["questions"].push_back(std::move(j));
  }
  doc["interaction_pairs"] = nlohmann::json::array();
  for (const auto& p : s.interaction_pairs) doc["interaction_pairs"].push_back({p.first, p.second});
  doc["priors"] = s.priors;
  doc["bands"] = {{"low", s.bands.low}, {"moderate", s.bands.moderate}, {"high", s.bands.high}};
  return doc;
}

std::string serialize_schema(const QuestionnaireSchema& s) { return schema_to_json(s).dump(2) + "\n"; }

QuestionnaireSchema load_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read schema file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

SchemaCatalog SchemaCatalog::load_directory(const std::filesystem::path& dir) {
  SchemaCatalog catalog;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::io, "schema directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) catalog.add(load_schema_file(f));
  return catalog;
}

void SchemaCatalog::add(QuestionnaireSchema schema) {
  auto id = schema.id;
  schemas_[id] = std::make_shared<const QuestionnaireSchema>(std::move(schema));
}

std::shared_ptr<const QuestionnaireSchema> SchemaCatalog::find(std::string_view id) const {
  auto it = schemas_.find(id);
  return it == schemas_.end() ? nullptr : it->second;
}

std::vector<std::string> SchemaCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : schemas_) out.push_back(id);
  return out;
}

}  // namespace infrisk
