#include "infrisk/probability.hpp"

#include <cmath>
#include <cstdio>

#include "infrisk/error.hpp"

namespace infrisk {

double sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::validation, "logit requires p in (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

std::string format_percentage(double probability) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw Error(ErrorCode::validation,
                "probability outside [0, 1]: " + std::to_string(probability));
  }
  if (probability == 0.0) {
    return "0%";
  }
  // The 1e-9 nudge keeps decimal half-way cases such as 0.015 (stored as
  // 0.01499999...) rounding up as written.
  const double percent = probability * 100.0;
  char buf[64];
  if (probability >= 0.01) {
    const double rounded = std::floor(percent + 0.5 + 1e-9);
    std::snprintf(buf, sizeof buf, "%.0f%%", rounded);
    return buf;
  }
  int decimals = -static_cast<int>(std::floor(std::log10(percent)));
  double digit = std::floor(percent * std::pow(10.0, decimals) + 0.5 + 1e-9);
  if (digit >= 10.0) {
    // Rounding carried into the next decade, e.g. 0.096% -> 0.1%.
    --decimals;
    digit = 1.0;
  }
  if (decimals <= 0) {
    return "1%";
  }
  const double rounded = digit / std::pow(10.0, decimals);
  std::snprintf(buf, sizeof buf, "%.*f%%", decimals, rounded);
  return buf;
}

std::string_view to_string(RiskBand band) noexcept {
  switch (band) {
    case RiskBand::low: return "low";
    case RiskBand::moderate: return "moderate";
    case RiskBand::high: return "high";
    case RiskBand::very_high: return "very-high";
  }
  return "low";
}

std::optional<RiskBand> parse_band(std::string_view name) noexcept {
  if (name == "low") return RiskBand::low;
  if (name == "moderate") return RiskBand::moderate;
  if (name == "high") return RiskBand::high;
  if (name == "very-high") return RiskBand::very_high;
  return std::nullopt;
}

RiskBand band_for(double probability, const BandThresholds& t) noexcept {
  if (probability < t.low) return RiskBand::low;
  if (probability < t.moderate) return RiskBand::moderate;
  if (probability < t.high) return RiskBand::high;
  return RiskBand::very_high;
}

}  // namespace infrisk
