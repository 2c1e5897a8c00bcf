#pragma once

#include <optional>
#include <string>
#include <vector>

#include "infrisk/answers.hpp"
#include "infrisk/assessment.hpp"
#include "infrisk/model_io.hpp"
#include "infrisk/schema.hpp"

namespace infrisk {

/// Risk for an encoded vector. Unknowns are marginalized over the schema
/// priors. In monte-carlo mode the probability is the mean over `samples`
/// noise draws and the interval spans their 2.5th..97.5th percentiles.
/// factor_deltas is left empty; see assess().
RiskAssessment logistic_risk(const FeatureVector& features, const LogisticModel& model,
                             const QuestionnaireSchema& schema);

/// Single-act product-model risk.
RiskAssessment sti_per_act_risk(const StiProductModel& model, const std::string& contact_type,
                                const std::vector<std::string>& partner_evidence,
                                const std::vector<std::string>& active_modifiers,
                                const BandThresholds& thresholds = {});

struct Evaluation {
  double probability = 0.0;
  std::optional<RiskInterval> interval;
};

/// Probability of a validated answer set under either model kind.
Evaluation evaluate(const QuestionnaireSchema& schema, const RiskModel& model,
                    const AnswerSet& validated);

/// For each modifiable question not already at its protective answer:
/// risk(with protective answer) - risk(current answers), most negative first.
std::vector<FactorDelta> modifiable_factor_deltas(const AnswerSet& answers, const RiskModel& model,
                                                  const QuestionnaireSchema& schema);

/// Validate, encode, evaluate and explain.
RiskAssessment assess(const QuestionnaireSchema& schema, const RiskModel& model,
                      const AnswerSet& answers);

}  // namespace infrisk
