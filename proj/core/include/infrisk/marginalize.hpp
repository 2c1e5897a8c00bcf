#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "infrisk/feature_vector.hpp"
#include "infrisk/logistic_model.hpp"

namespace infrisk {

/// Up to this many free unknowns are enumerated exhaustively.
inline constexpr std::size_t kExhaustiveUnknownLimit = 12;
/// Draws used beyond the exhaustive limit.
inline constexpr int kMarginalizationSamples = 10000;
inline constexpr std::uint64_t kMarginalizationSeed = 0x5eed'1e55'f00d'cafeULL;

using CompletionVisitor = std::function<void(double weight, const FeatureVector& completed)>;

/// Calls `visit` for each completion of the unknown binary features, with
/// completions independent under `priors`. Unknowns whose prior is exactly
/// 0 or 1 are fixed rather than enumerated. Weights sum to 1. Throws
/// Error(configuration) naming every unknown without a prior in [0, 1].
void for_each_completion(const FeatureVector& features, const std::map<std::string, double>& priors,
                         const CompletionVisitor& visit,
                         std::uint64_t seed = kMarginalizationSeed);

/// Sum over completions of weight * risk(completion).
double marginalize(const FeatureVector& features, const std::map<std::string, double>& priors,
                   const std::function<double(const FeatureVector&)>& risk);

/// Expected sigmoid(linear predictor) over the unknown features.
double marginalize_unknowns(const FeatureVector& features, const LogisticModel& model,
                            const std::map<std::string, double>& priors);

}  // namespace infrisk
