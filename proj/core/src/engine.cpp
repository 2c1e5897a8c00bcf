#include "infrisk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "infrisk/error.hpp"
#include "infrisk/marginalize.hpp"

namespace infrisk {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; one normal per pair of uniforms keeps the stream simple.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Linear interpolation between order statistics.
double percentile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Evaluation evaluate_logistic(const FeatureVector& features, const LogisticModel& model,
                             const std::map<std::string, double>& priors) {
  std::vector<std::pair<double, double>> completions;  // (weight, predictor)
  for_each_completion(features, priors, [&](double w, const FeatureVector& c) {
    completions.emplace_back(w, linear_predictor(c, model));
  });

  auto marginal = [&](double shift) {
    double p = 0.0;
    for (const auto& [w, eta] : completions) p += w * sigmoid(eta + shift);
    return p;
  };

  Evaluation ev;
  if (model.noise.mode == NoiseMode::deterministic) {
    ev.probability = marginal(0.0);
    return ev;
  }

  std::mt19937_64 rng(model.noise.seed);
  std::vector<double> draws(static_cast<std::size_t>(model.noise.samples));
  double sum = 0.0;
  for (auto& d : draws) {
    d = marginal(model.noise.std_dev * standard_normal(rng));
    sum += d;
  }
  ev.probability = std::clamp(sum / static_cast<double>(draws.size()), 0.0, 1.0);
  std::sort(draws.begin(), draws.end());
  ev.interval = RiskInterval{std::min(percentile(draws, 0.025), ev.probability),
                             std::max(percentile(draws, 0.975), ev.probability)};
  return ev;
}

struct StiRouting {
  std::string contact_type;
  long acts = 1;
  std::vector<std::string> attributes;
  std::vector<std::string> modifiers;
};

StiRouting route_sti(const QuestionnaireSchema& schema, const AnswerSet& validated) {
  StiRouting r;
  bool have_contact = false;
  for (const auto& q : schema.questions) {
    const auto* sec = schema.find_section(q.section);
    const bool open = sec == nullptr || section_open(schema, validated, *sec);
    auto it = validated.answers.find(q.id);
    switch (q.role) {
      case QuestionRole::contact_type:
        if (open && it != validated.answers.end()) {
          if (const auto* s = std::get_if<std::string>(&it->second)) {
            r.contact_type = *s;
            have_contact = true;
          }
        }
        break;
      case QuestionRole::repetitions:
        if (open && it != validated.answers.end()) {
          if (const auto* d = std::get_if<double>(&it->second)) r.acts = std::lround(*d);
        }
        break;
      case QuestionRole::partner_attribute:
        r.attributes.push_back(*q.feature);
        break;
      case QuestionRole::modifier:
        r.modifiers.push_back(*q.feature);
        break;
      case QuestionRole::feature:
        break;
    }
  }
  if (!have_contact) throw Error(ErrorCode::validation, "contact type is not answered");
  return r;
}

Evaluation evaluate_sti(const QuestionnaireSchema& schema, const StiProductModel& model,
                        const AnswerSet& validated) {
  const auto routing = route_sti(schema, validated);
  const auto features = encode_features(schema, validated);
  auto risk = [&](const FeatureVector& c) {
    std::vector<std::string> evidence;
    std::vector<std::string> active;
    for (const auto& f : routing.attributes) {
      if (c.value_or_zero(f) == 1.0) evidence.push_back(f);
    }
    for (const auto& f : routing.modifiers) {
      if (c.value_or_zero(f) == 1.0) active.push_back(f);
    }
    return compose_repeated_acts(sti_per_act_probability(model, routing.contact_type, evidence, active),
                                 routing.acts);
  };
  Evaluation ev;
  ev.probability = marginalize(features, schema.priors, risk);
  return ev;
}

}  // namespace

RiskAssessment logistic_risk(const FeatureVector& features, const LogisticModel& model,
                             const QuestionnaireSchema& schema) {
  const auto ev = evaluate_logistic(features, model, schema.priors);
  auto a = make_assessment(ev.probability, schema.bands);
  a.interval = ev.interval;
  return a;
}

RiskAssessment sti_per_act_risk(const StiProductModel& model, const std::string& contact_type,
                                const std::vector<std::string>& partner_evidence,
                                const std::vector<std::string>& active_modifiers,
                                const BandThresholds& thresholds) {
  return make_assessment(sti_per_act_probability(model, contact_type, partner_evidence, active_modifiers),
                         thresholds);
}

Evaluation evaluate(const QuestionnaireSchema& schema, const RiskModel& model,
                    const AnswerSet& validated) {
  if (kind_of(model) != schema.model_kind) {
    throw Error(ErrorCode::schema_mismatch, "model kind does not match schema '" + schema.id + "'");
  }
  if (const auto* m = std::get_if<LogisticModel>(&model)) {
    return evaluate_logistic(encode_features(schema, validated), *m, schema.priors);
  }
  return evaluate_sti(schema, std::get<StiProductModel>(model), validated);
}

namespace {

std::vector<FactorDelta> deltas_for_validated(const AnswerSet& validated, double baseline,
                                              const RiskModel& model,
                                              const QuestionnaireSchema& schema) {
  std::vector<FactorDelta> out;
  for (const auto& q : schema.questions) {
    if (!q.modifiable || !q.protective) continue;
    const auto* sec = schema.find_section(q.section);
    if (sec != nullptr && !section_open(schema, validated, *sec)) continue;
    auto it = validated.answers.find(q.id);
    if (it != validated.answers.end() && it->second == *q.protective) continue;
    AnswerSet toggled = validated;
    toggled.answers[q.id] = *q.protective;
    out.push_back({q.id, evaluate(schema, model, toggled).probability - baseline});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FactorDelta& a, const FactorDelta& b) { return a.delta < b.delta; });
  return out;
}

}  // namespace

std::vector<FactorDelta> modifiable_factor_deltas(const AnswerSet& answers, const RiskModel& model,
                                                  const QuestionnaireSchema& schema) {
  const auto validated = validate_answers(schema, answers);
  return deltas_for_validated(validated, evaluate(schema, model, validated).probability, model, schema);
}

RiskAssessment assess(const QuestionnaireSchema& schema, const RiskModel& model,
                      const AnswerSet& answers) {
  const auto validated = validate_answers(schema, answers);
  const auto ev = evaluate(schema, model, validated);
  auto a = make_assessment(ev.probability, schema.bands);
  a.interval = ev.interval;
  a.factor_deltas = deltas_for_validated(validated, ev.probability, model, schema);
  return a;
}

}  // namespace infrisk
