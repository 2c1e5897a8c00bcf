#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace infrisk {

/// Per-act infection model: P(infection) = P(partner infected | partner
/// information) * P(transmission | contact type) * product of modifiers.
struct StiProductModel {
  std::string model_id;
  std::string schema_id;
  int version = 1;
  std::string note;

  double base_prevalence = 0.0;                 // prior that the partner is infected
  std::map<std::string, double> attribute_lr;   // partner attribute -> positive likelihood ratio
  std::map<std::string, double> transmission;   // contact type -> per-act transmission probability
  std::map<std::string, double> modifiers;      // modifier -> factor in (0, 1]

  bool operator==(const StiProductModel&) const = default;
};

/// Invariant violations of the model, empty when valid.
std::vector<std::string> check_sti_model(const StiProductModel& model);

/// Naive-Bayes posterior in odds form:
///   posterior_odds = prior_odds * prod(ratios).
/// A prior of exactly 0 or 1 is returned unchanged.
/// Throws Error(validation) for a prior outside [0, 1] or a ratio <= 0.
double partner_infection_probability(double prior, std::span<const double> ratios);

struct NamedRatio {
  std::string attribute;
  double ratio;
};

/// As above; a nonpositive ratio is reported by attribute name.
double partner_infection_probability(double prior, std::span<const NamedRatio> evidence);

/// Risk of one act. Throws Error(schema_mismatch) for ids the model does
/// not declare.
double sti_per_act_probability(const StiProductModel& model, const std::string& contact_type,
                               const std::vector<std::string>& partner_evidence,
                               const std::vector<std::string>& active_modifiers);

/// 1 - (1 - per_act)^n for n independent acts. Throws for n == 0.
double compose_repeated_acts(double per_act, long n);

}  // namespace infrisk
