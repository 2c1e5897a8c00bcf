#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>

namespace infrisk {

/// Encoded independent variables. Binary items are 0/1, numeric items are
/// min-max scaled to [0, 1]. Items answered "do not know" live only in
/// `unknown`, never in `values`.
struct FeatureVector {
  std::map<std::string, double> values;
  std::set<std::string> unknown;

  /// Missing features encode as 0.
  double value_or_zero(const std::string& feature) const;

  bool operator==(const FeatureVector&) const = default;
};

/// Ordered pair of distinct feature ids, the key of an interaction term.
struct FeaturePair {
  std::string first;
  std::string second;

  std::string name() const { return first + ":" + second; }

  auto operator<=>(const FeaturePair&) const = default;
  bool operator==(const FeaturePair&) const = default;
};

}  // namespace infrisk
