#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "infrisk/answer_value.hpp"
#include "infrisk/feature_vector.hpp"
#include "infrisk/probability.hpp"

namespace infrisk {

enum class Widget { checkbox, dropdown, slider, tri_state };
enum class Audience { patient, hospital, sanitary_inspection };
enum class ModelKind { sti_product, logistic };

/// How a question feeds the model. Logistic schemas use `feature` only;
/// product-model schemas route answers to the contact type, partner
/// evidence, transmission modifiers and act count.
enum class QuestionRole { feature, contact_type, partner_attribute, modifier, repetitions };

std::string_view to_string(Widget w) noexcept;
std::string_view to_string(Audience a) noexcept;
std::string_view to_string(ModelKind k) noexcept;
std::string_view to_string(QuestionRole r) noexcept;

/// Label text keyed by language tag ("pl" is primary, "en" secondary).
using Labels = std::map<std::string, std::string>;

struct Option {
  std::string value;
  Labels labels;
  /// Dummy feature set to 1 when chosen. The reference level has none.
  std::optional<std::string> feature;

  bool operator==(const Option&) const = default;
};

struct SliderBounds {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.0;  // UI hint only, 0 means continuous
  double default_value = 0.0;

  bool operator==(const SliderBounds&) const = default;
};

struct Question {
  std::string id;
  std::string section;
  Widget widget = Widget::checkbox;
  QuestionRole role = QuestionRole::feature;
  Labels labels;
  std::optional<std::string> feature;  // checkbox, tri-state, slider
  std::vector<Option> options;         // dropdown
  std::optional<SliderBounds> bounds;  // slider
  bool allow_unknown = false;
  bool modifiable = false;
  bool required = false;
  /// The answer that lowers risk, for modifiable questions.
  std::optional<AnswerValue> protective;

  const Option* find_option(std::string_view value) const;
  /// Feature ids this question encodes into, in encoding order.
  std::vector<std::string> features() const;

  bool operator==(const Question&) const = default;
};

/// A section shown only when `question` is answered with `equals`.
struct SectionGate {
  std::string question;
  AnswerValue equals;

  bool operator==(const SectionGate&) const = default;
};

struct Section {
  std::string id;
  Labels labels;
  bool optional = false;
  std::optional<SectionGate> gate;

  bool operator==(const Section&) const = default;
};

struct QuestionnaireSchema {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string id;
  Audience audience = Audience::patient;
  ModelKind model_kind = ModelKind::logistic;
  Labels labels;
  std::vector<Section> sections;
  std::vector<Question> questions;
  std::vector<FeaturePair> interaction_pairs;
  std::map<std::string, double> priors;
  BandThresholds bands;

  /// All feature ids in question order.
  std::vector<std::string> feature_ids() const;
  const Question* find_question(std::string_view id) const;
  const Section* find_section(std::string_view id) const;
  /// The question encoding `feature`, or nullptr.
  const Question* question_for_feature(std::string_view feature) const;

  bool operator==(const QuestionnaireSchema&) const = default;
};

/// Reason `value` is outside the question's widget domain, or nullopt when
/// it is acceptable. "Do not know" is acceptable only for allow_unknown.
std::optional<std::string> domain_violation(const Question& question, const AnswerValue& value);

/// Every structural violation of the schema invariants; empty when valid.
std::vector<std::string> check_schema(const QuestionnaireSchema& schema);

/// Parses and validates. Throws Error(parse) whose details list all
/// violations found, structural and semantic.
QuestionnaireSchema parse_schema(std::string_view text);
QuestionnaireSchema schema_from_json(const nlohmann::json& doc);

nlohmann::json schema_to_json(const QuestionnaireSchema& schema);

/// Canonical form: sorted keys, two-space indent, trailing newline.
std::string serialize_schema(const QuestionnaireSchema& schema);

QuestionnaireSchema load_schema_file(const std::filesystem::path& path);

/// Read-only set of parsed schemas keyed by id.
class SchemaCatalog {
 public:
  SchemaCatalog() = default;

  /// Loads every *.json in `dir`. Throws on the first invalid file.
  static SchemaCatalog load_directory(const std::filesystem::path& dir);

  void add(QuestionnaireSchema schema);
  std::shared_ptr<const QuestionnaireSchema> find(std::string_view id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const noexcept { return schemas_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const QuestionnaireSchema>, std::less<>> schemas_;
};

}  // namespace infrisk
