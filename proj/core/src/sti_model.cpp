#include "infrisk/sti_model.hpp"

#include <cmath>

#include "infrisk/error.hpp"

namespace infrisk {

std::vector<std::string> check_sti_model(const StiProductModel& m) {
  std::vector<std::string> v;
  if (!(m.base_prevalence >= 0.0 && m.base_prevalence <= 1.0)) {
    v.push_back("base_prevalence outside [0, 1]");
  }
  if (m.transmission.empty()) v.push_back("transmission table is empty");
  for (const auto& [k, p] : m.transmission) {
    if (!(p >= 0.0 && p <= 1.0)) v.push_back("transmission '" + k + "' outside [0, 1]");
  }
  for (const auto& [k, lr] : m.attribute_lr) {
    if (!(lr > 0.0) || !std::isfinite(lr)) v.push_back("likelihood ratio '" + k + "' must be positive and finite");
  }
  for (const auto& [k, f] : m.modifiers) {
    if (!(f > 0.0 && f <= 1.0)) v.push_back("modifier '" + k + "' outside (0, 1]");
  }
  return v;
}

double partner_infection_probability(double prior, std::span<const double> ratios) {
  if (!(prior >= 0.0 && prior <= 1.0)) {
    throw Error(ErrorCode::validation, "prior outside [0, 1]");
  }
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0) || !std::isfinite(ratios[i])) {
      throw Error(ErrorCode::validation,
                  "likelihood ratio #" + std::to_string(i) + " must be positive and finite");
    }
  }
  if (prior == 0.0 || prior == 1.0 || ratios.empty()) return prior;

  double odds = prior / (1.0 - prior);
  for (double r : ratios) odds *= r;
  if (std::isinf(odds)) return 1.0;
  return odds / (1.0 + odds);
}

double partner_infection_probability(double prior, std::span<const NamedRatio> evidence) {
  std::vector<double> ratios;
  ratios.reserve(evidence.size());
  for (const auto& e : evidence) {
    if (!(e.ratio > 0.0) || !std::isfinite(e.ratio)) {
      throw Error(ErrorCode::validation,
                  "likelihood ratio for '" + e.attribute + "' must be positive and finite");
    }
    ratios.push_back(e.ratio);
  }
  return partner_infection_probability(prior, ratios);
}

double sti_per_act_probability(const StiProductModel& model, const std::string& contact_type,
                               const std::vector<std::string>& partner_evidence,
                               const std::vector<std::string>& active_modifiers) {
  auto t = model.transmission.find(contact_type);
  if (t == model.transmission.end()) {
    throw Error(ErrorCode::schema_mismatch, "unknown contact type '" + contact_type + "'");
  }
  std::vector<NamedRatio> evidence;
  evidence.reserve(partner_evidence.size());
  for (const auto& attr : partner_evidence) {
    auto it = model.attribute_lr.find(attr);
    if (it == model.attribute_lr.end()) {
      throw Error(ErrorCode::schema_mismatch, "unknown partner attribute '" + attr + "'");
    }
    evidence.push_back({attr, it->second});
  }
  double factor = 1.0;
  for (const auto& mod : active_modifiers) {
    auto it = model.modifiers.find(mod);
    if (it == model.modifiers.end()) {
      throw Error(ErrorCode::schema_mismatch, "unknown modifier '" + mod + "'");
    }
    factor *= it->second;
  }
  const double partner = partner_infection_probability(model.base_prevalence, std::span<const NamedRatio>(evidence));
  return partner * t->second * factor;
}

double compose_repeated_acts(double per_act, long n) {
  if (n < 1) throw Error(ErrorCode::validation, "number of acts must be at least 1");
  if (!(per_act >= 0.0 && per_act <= 1.0)) {
    throw Error(ErrorCode::validation, "per-act probability outside [0, 1]");
  }
  if (n == 1) return per_act;
  return -std::expm1(static_cast<double>(n) * std::log1p(-per_act));
}

}  // namespace infrisk
