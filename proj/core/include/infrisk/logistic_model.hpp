#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "infrisk/feature_vector.hpp"

namespace infrisk {

enum class NoiseMode { deterministic, monte_carlo };

/// Optional zero-mean Gaussian perturbation of the linear predictor, used to
/// report an uncertainty interval. Deterministic mode adds exactly nothing.
struct NoiseConfig {
  NoiseMode mode = NoiseMode::deterministic;
  double std_dev = 0.0;
  std::uint64_t seed = 0;
  int samples = 1000;

  bool operator==(const NoiseConfig&) const = default;
};

/// Y = intercept + sum b_i X_i + sum b_ij X_i X_j; P = sigmoid(Y).
struct LogisticModel {
  std::string model_id;
  std::string schema_id;
  int version = 1;
  std::string note;

  double intercept = 0.0;
  std::map<std::string, double> main_coefs;
  std::map<FeaturePair, double> interaction_coefs;
  NoiseConfig noise;

  bool operator==(const LogisticModel&) const = default;
};

std::vector<std::string> check_logistic_model(const LogisticModel& model);

/// Requires an empty unknown set (Error(validation) otherwise). Features the
/// model does not mention contribute zero, as do coefficients for features
/// absent from the vector.
double linear_predictor(const FeatureVector& features, const LogisticModel& model);

}  // namespace infrisk
