#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace infrisk {

/// Logistic link. Evaluated without overflow for any finite argument.
double sigmoid(double x) noexcept;

/// log(sigmoid(x)), stable for |x| well beyond 700.
double log_sigmoid(double x) noexcept;

/// Inverse of sigmoid for p in (0, 1).
double logit(double p);

/// Renders a probability as a percentage string.
///
/// Values >= 0.01 become an integer percent with half-up rounding ("2%").
/// Values in (0, 0.01) keep one significant digit ("0.4%", "0.03%") so a
/// small but nonzero risk never reads as "0%". Exactly 0 renders "0%".
/// Throws Error(validation) outside [0, 1] or for NaN.
std::string format_percentage(double probability);

enum class RiskBand { low, moderate, high, very_high };

std::string_view to_string(RiskBand band) noexcept;
std::optional<RiskBand> parse_band(std::string_view name) noexcept;

/// Upper bounds (exclusive) of the first three bands; anything at or above
/// `high` is very-high.
struct BandThresholds {
  double low = 0.01;
  double moderate = 0.05;
  double high = 0.20;

  bool operator==(const BandThresholds&) const = default;
};

RiskBand band_for(double probability, const BandThresholds& thresholds) noexcept;

}  // namespace infrisk
