#pragma once

// Independent reference implementations and generators shared by the unit
// and acceptance suites. Nothing here calls the library code it checks.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "infrisk/answers.hpp"
#include "infrisk/calibration/cohort.hpp"
#include "infrisk/logistic_model.hpp"
#include "infrisk/model_io.hpp"
#include "infrisk/schema.hpp"

namespace infrisk::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture(const std::string& name);
QuestionnaireSchema shipped_schema(const std::string& id);
RiskModel shipped_model(const std::string& id);
std::vector<std::string> shipped_schema_ids();

// 53-bit uniform in [0, 1) and Box-Muller normal; same stream on every
// platform, unlike the std distributions.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
double standard_normal(std::mt19937_64& rng);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// ---- Bayesian partner posterior -------------------------------------------

struct AttributeLikelihood {
  double given_infected;  // P(attribute present | partner infected)
  double given_clean;     // P(attribute present | partner not infected)
};

/// P(infected | every attribute present) by summing the full joint table
/// over the infection state and all attribute states.
double joint_table_posterior(double prior, const std::vector<AttributeLikelihood>& attributes);

// ---- Marginalization --------------------------------------------------------

/// Expectation of `risk` over every 0/1 completion of features.unknown,
/// independent Bernoulli(prior) per unknown, by plain enumeration.
double enumerate_expectation(const FeatureVector& features, const std::map<std::string, double>& priors,
                             const std::function<double(const FeatureVector&)>& risk);

/// sigmoid(intercept + sum b_i x_i + sum b_ij x_i x_j) in long double.
double reference_logistic_probability(const FeatureVector& features, const LogisticModel& model);

struct RandomLogisticCase {
  QuestionnaireSchema schema;
  LogisticModel model;
  AnswerSet answers;
  FeatureVector features;  // encoded independently of the library
};

/// Binary-only logistic schema with tri-state items, random priors
/// (including exact 0 and 1), random interactions, and an answer set with
/// at most `max_unknowns` unknowns.
RandomLogisticCase random_logistic_case(std::mt19937_64& rng, std::size_t max_unknowns,
                                        std::size_t forced_unknowns = 0);

/// Random valid answer set for any schema, leaving some questions unanswered.
AnswerSet random_answers(const QuestionnaireSchema& schema, std::mt19937_64& rng);

// ---- Calibration --------------------------------------------------------------

struct Generator {
  double intercept = -2.0;
  double x1 = 1.0;
  double x2 = 0.0;
  double x1_x2 = 0.5;
};

/// x1, x2 ~ N(0, 1); y ~ Bernoulli(sigmoid(generator)).
CohortDataset synthetic_cohort(std::size_t n, std::uint64_t seed, const Generator& g = {});

/// Small random cohort with `features` N(0, s^2) columns, random
/// interactions and random true coefficients.
CohortDataset random_cohort(std::mt19937_64& rng, std::size_t rows, std::size_t features);

/// Column-ordered coefficients: intercept, features, interactions.
std::vector<double> coefficient_vector(const LogisticModel& model, const CohortDataset& ds);
LogisticModel model_from_vector(const std::vector<double>& beta, const CohortDataset& ds);

/// sum y log p + (1 - y) log(1 - p) - lambda/2 |beta|^2, long double.
long double reference_objective(const CohortDataset& ds, const std::vector<double>& beta, double lambda);

// ---- Processes and files ------------------------------------------------------

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const;

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CommandResult run_command(const std::vector<std::string>& argv);

/// A loopback TCP port that was free a moment ago.
int free_loopback_port();
std::string read_file(const std::filesystem::path& p);

}  // namespace infrisk::testing
