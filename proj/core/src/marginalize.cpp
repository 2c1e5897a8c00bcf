#include "infrisk/marginalize.hpp"

#include <random>
#include <vector>

#include "infrisk/error.hpp"
#include "infrisk/probability.hpp"

namespace infrisk {

namespace {

// Portable uniform in [0, 1): the std distributions differ across standard
// libraries, this does not.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void for_each_completion(const FeatureVector& features, const std::map<std::string, double>& priors,
                         const CompletionVisitor& visit, std::uint64_t seed) {
  std::vector<std::string> problems;
  FeatureVector base;
  base.values = features.values;
  std::vector<std::pair<std::string, double>> free;
  for (const auto& f : features.unknown) {
    auto it = priors.find(f);
    if (it == priors.end()) {
      problems.push_back("unknown feature '" + f + "' has no prior");
      continue;
    }
    const double p = it->second;
    if (!(p >= 0.0 && p <= 1.0)) {
      problems.push_back("prior for '" + f + "' outside [0, 1]");
    } else if (p == 0.0 || p == 1.0) {
      base.values[f] = p;
    } else {
      free.emplace_back(f, p);
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::configuration, "cannot marginalize unknown answers", std::move(problems));
  }

  if (free.empty()) {
    visit(1.0, base);
    return;
  }

  FeatureVector completed = base;
  if (free.size() <= kExhaustiveUnknownLimit) {
    const std::size_t count = std::size_t{1} << free.size();
    for (std::size_t mask = 0; mask < count; ++mask) {
      double weight = 1.0;
      for (std::size_t i = 0; i < free.size(); ++i) {
        const bool on = (mask >> i) & 1U;
        completed.values[free[i].first] = on ? 1.0 : 0.0;
        weight *= on ? free[i].second : 1.0 - free[i].second;
      }
      visit(weight, completed);
    }
    return;
  }

  std::mt19937_64 rng(seed);
  const double weight = 1.0 / kMarginalizationSamples;
  for (int draw = 0; draw < kMarginalizationSamples; ++draw) {
    for (const auto& [f, p] : free) {
      completed.values[f] = uniform01(rng) < p ? 1.0 : 0.0;
    }
    visit(weight, completed);
  }
}

double marginalize(const FeatureVector& features, const std::map<std::string, double>& priors,
                   const std::function<double(const FeatureVector&)>& risk) {
  double total = 0.0;
  for_each_completion(features, priors, [&](double w, const FeatureVector& c) { total += w * risk(c); });
  return total;
}

double marginalize_unknowns(const FeatureVector& features, const LogisticModel& model,
                            const std::map<std::string, double>& priors) {
  return marginalize(features, priors,
                     [&](const FeatureVector& c) { return sigmoid(linear_predictor(c, model)); });
}

}  // namespace infrisk
