#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "infrisk/probability.hpp"

namespace infrisk {

/// Change in probability if the factor were set to its protective answer.
struct FactorDelta {
  std::string factor;
  double delta = 0.0;

  bool operator==(const FactorDelta&) const = default;
};

struct RiskInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const RiskInterval&) const = default;
};

struct RiskAssessment {
  double probability = 0.0;
  std::string display;
  RiskBand band = RiskBand::low;
  std::vector<FactorDelta> factor_deltas;
  std::optional<RiskInterval> interval;  // monte-carlo mode only

  bool operator==(const RiskAssessment&) const = default;
};

/// Fills display and band from the probability.
RiskAssessment make_assessment(double probability, const BandThresholds& thresholds);

nlohmann::json assessment_to_json(const RiskAssessment& assessment);
RiskAssessment assessment_from_json(const nlohmann::json& doc);

/// Wire form shared by the HTTP service and `infrisk assess --format json`.
std::string assessment_body(const RiskAssessment& assessment);

}  // namespace infrisk
