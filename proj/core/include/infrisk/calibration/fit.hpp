#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infrisk/calibration/cohort.hpp"
#include "infrisk/logistic_model.hpp"

namespace infrisk {

struct FitConfig {
  double tolerance = 1e-8;  // on max |gradient component|
  int max_iters = 100;
  double ridge_lambda = 0.0;
};

/// Coefficients beyond this magnitude are read as quasi-separation.
inline constexpr double kSeparationCoefficientLimit = 15.0;
/// Penalty applied when an unpenalized fit separates or fails to converge.
inline constexpr double kFallbackRidgeLambda = 1e-3;
inline constexpr int kMaxStepHalvings = 10;

struct FitReport {
  LogisticModel coefficients;
  double log_likelihood = 0.0;  // unpenalized, at the solution
  int iterations = 0;
  bool converged = false;
  double max_gradient_norm = 0.0;  // of the penalized objective
  double penalty_used = 0.0;
  std::map<std::string, double> standard_errors;
  std::size_t rows = 0;

  /// Penalized log-likelihood at the start point and after every accepted
  /// step, alongside the matching coefficient iterates in column order.
  std::vector<double> objective_trace;
  std::vector<std::vector<double>> coefficient_trace;
};

/// Column names of the design matrix: "intercept", the features, then one
/// "a:b" column per interaction pair.
std::vector<std::string> design_columns(const CohortDataset& dataset);

/// sum of y log p + (1 - y) log(1 - p), evaluated through log-sigmoid.
double log_likelihood(const CohortDataset& dataset, const LogisticModel& model);

/// d log_likelihood / d coefficient, in design_columns() order.
std::vector<double> gradient(const CohortDataset& dataset, const LogisticModel& model);

/// Maximum likelihood by IRLS with step-halving. The ridge penalty
/// lambda/2 * |b|^2 covers every coefficient including the intercept. Rows
/// are put in a canonical order first, so the result does not depend on the
/// input order.
///
/// Throws Error(validation) for an empty dataset, non-finite features or a
/// single outcome class without ridge, and Error(degenerate_design) when the
/// penalized weighted normal matrix still cannot be factorized.
FitReport fit_logistic(const CohortDataset& dataset, const FitConfig& config = {});

/// Model document plus a `fit_diagnostics` block.
nlohmann::json fit_report_to_json(const FitReport& report);

}  // namespace infrisk
