#include "infrisk/calibration/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "infrisk/error.hpp"
#include "infrisk/model_io.hpp"
#include "infrisk/probability.hpp"

namespace infrisk {

namespace {

/// Neumaier compensated summation.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// softplus(eta + d) - softplus(eta) without cancellation for small d.
double softplus_change(double eta, double d) {
  if (std::abs(d) > 1.0) return softplus(eta + d) - softplus(eta);
  return std::log1p(sigmoid(eta) * std::expm1(d));
}

std::vector<double> design_row(const FeatureVector& f, const CohortDataset& ds) {
  std::vector<double> row;
  row.reserve(1 + ds.feature_ids.size() + ds.interaction_pairs.size());
  row.push_back(1.0);
  for (const auto& id : ds.feature_ids) row.push_back(f.value_or_zero(id));
  for (const auto& p : ds.interaction_pairs) row.push_back(f.value_or_zero(p.first) * f.value_or_zero(p.second));
  return row;
}

std::vector<double> model_coefficients(const LogisticModel& m, const CohortDataset& ds) {
  std::vector<double> beta;
  beta.push_back(m.intercept);
  for (const auto& id : ds.feature_ids) {
    auto it = m.main_coefs.find(id);
    beta.push_back(it == m.main_coefs.end() ? 0.0 : it->second);
  }
  for (const auto& p : ds.interaction_pairs) {
    auto it = m.interaction_coefs.find(p);
    beta.push_back(it == m.interaction_coefs.end() ? 0.0 : it->second);
  }
  return beta;
}

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Design build_design(const CohortDataset& ds) {
  std::vector<std::pair<std::vector<double>, int>> rows;
  rows.reserve(ds.rows.size());
  for (const auto& r : ds.rows) rows.emplace_back(design_row(r.features, ds), r.outcome);
  std::sort(rows.begin(), rows.end());

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.empty() ? 1 : rows.front().first.size());
  Design d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = rows[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(j)];
    d.y(i) = rows[static_cast<std::size_t>(i)].second;
  }
  return d;
}

double objective(const Design& d, const Eigen::VectorXd& beta, double lambda) {
  const Eigen::VectorXd eta = d.x * beta;
  Accumulator acc;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    acc.add(d.y(i) * eta(i) - softplus(eta(i)));
  }
  acc.add(-0.5 * lambda * beta.squaredNorm());
  return acc.value();
}

// Objective change from beta to beta + step, accurate to rounding in the
// change itself rather than in the (much larger) objective.
double objective_change(const Design& d, const Eigen::VectorXd& eta, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& step, double lambda) {
  const Eigen::VectorXd de = d.x * step;
  Accumulator acc;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    acc.add(d.y(i) * de(i));
    acc.add(-softplus_change(eta(i), de(i)));
  }
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    acc.add(-0.5 * lambda * (2.0 * beta(j) * step(j) + step(j) * step(j)));
  }
  return acc.value();
}

struct IrlsRun {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
  bool separated = false;
  double gradient_norm = 0.0;
  std::vector<double> trace;
  std::vector<std::vector<double>> betas;
};

Eigen::VectorXd probabilities(const Eigen::VectorXd& eta) {
  Eigen::VectorXd p(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = sigmoid(eta(i));
  return p;
}

Eigen::MatrixXd weighted_normal(const Design& d, const Eigen::VectorXd& p, double lambda) {
  const Eigen::ArrayXd w = p.array() * (1.0 - p.array());
  Eigen::MatrixXd h = d.x.transpose() * (d.x.array().colwise() * w).matrix();
  h.diagonal().array() += lambda;
  return h;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

IrlsRun run_irls(const Design& d, double lambda, const FitConfig& cfg, bool separation_guard) {
  IrlsRun run;
  run.beta = Eigen::VectorXd::Zero(d.x.cols());
  double obj = objective(d, run.beta, lambda);
  run.trace.push_back(obj);
  run.betas.push_back(to_std(run.beta));

  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd eta = d.x * run.beta;
    const Eigen::VectorXd p = probabilities(eta);
    const Eigen::VectorXd g = d.x.transpose() * (d.y - p) - lambda * run.beta;
    run.gradient_norm = g.cwiseAbs().maxCoeff();
    if (!std::isfinite(run.gradient_norm)) {
      run.singular = true;
      return run;
    }
    if (run.gradient_norm <= cfg.tolerance) {
      run.converged = true;
      return run;
    }
    if (iter >= cfg.max_iters) return run;

    const Eigen::MatrixXd h = weighted_normal(d, p, lambda);
    if (!h.allFinite()) {
      run.singular = true;
      return run;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
      run.singular = true;
      return run;
    }
    const Eigen::VectorXd delta = llt.solve(g);

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxStepHalvings; ++halving, scale *= 0.5) {
      const Eigen::VectorXd step = scale * delta;
      const double change = objective_change(d, eta, run.beta, step, lambda);
      if (change >= 0.0) {
        run.beta += step;
        obj += change;
        accepted = true;
        break;
      }
    }
    if (!accepted) return run;  // stalled: no ascent direction found

    ++run.iterations;
    run.trace.push_back(obj);
    run.betas.push_back(to_std(run.beta));
    if (separation_guard && run.beta.cwiseAbs().maxCoeff() > kSeparationCoefficientLimit) {
      run.separated = true;
      return run;
    }
  }
}

std::vector<std::string> degenerate_columns(const Design& d, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
    if (!d.x.col(j).allFinite() || !(d.x.col(j).squaredNorm() < 1e300)) {
      out.push_back(names[static_cast<std::size_t>(j)] + " (values too large)");
    }
  }
  if (!out.empty()) return out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  const auto perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < perm.size(); ++k) {
    out.push_back(names[static_cast<std::size_t>(perm(k))] + " (collinear)");
  }
  return out;
}

}  // namespace

std::vector<std::string> design_columns(const CohortDataset& ds) {
  std::vector<std::string> cols{"intercept"};
  for (const auto& f : ds.feature_ids) cols.push_back(f);
  for (const auto& p : ds.interaction_pairs) cols.push_back(p.name());
  return cols;
}

double log_likelihood(const CohortDataset& ds, const LogisticModel& model) {
  if (ds.rows.empty()) throw Error(ErrorCode::validation, "log-likelihood of an empty dataset");
  Accumulator acc;
  for (const auto& r : ds.rows) {
    const double eta = linear_predictor(r.features, model);
    acc.add(r.outcome == 1 ? log_sigmoid(eta) : log_sigmoid(-eta));
  }
  return acc.value();
}

std::vector<double> gradient(const CohortDataset& ds, const LogisticModel& model) {
  if (ds.rows.empty()) throw Error(ErrorCode::validation, "gradient of an empty dataset");
  const auto beta = model_coefficients(model, ds);
  std::vector<Accumulator> acc(beta.size());
  for (const auto& r : ds.rows) {
    const auto x = design_row(r.features, ds);
    const double eta = std::inner_product(x.begin(), x.end(), beta.begin(), 0.0);
    const double resid = r.outcome - sigmoid(eta);
    for (std::size_t j = 0; j < x.size(); ++j) acc[j].add(resid * x[j]);
  }
  std::vector<double> g;
  for (const auto& a : acc) g.push_back(a.value());
  return g;
}

FitReport fit_logistic(const CohortDataset& ds, const FitConfig& cfg) {
  if (ds.rows.empty()) throw Error(ErrorCode::validation, "no data rows");
  if (!(cfg.ridge_lambda >= 0.0) || !std::isfinite(cfg.ridge_lambda)) {
    throw Error(ErrorCode::validation, "ridge lambda must be a nonnegative number");
  }
  if (cfg.max_iters < 1) throw Error(ErrorCode::validation, "max_iters must be positive");

  std::size_t positives = 0;
  for (const auto& r : ds.rows) {
    if (r.outcome != 0 && r.outcome != 1) throw Error(ErrorCode::validation, "outcome must be 0 or 1");
    if (!r.features.unknown.empty()) throw Error(ErrorCode::validation, "cohort rows cannot contain unknowns");
    for (const auto& [f, v] : r.features.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::validation, "non-finite value for feature '" + f + "'");
    }
    positives += static_cast<std::size_t>(r.outcome);
  }
  if ((positives == 0 || positives == ds.rows.size()) && cfg.ridge_lambda == 0.0) {
    throw Error(ErrorCode::validation,
                "both outcome classes are required for an unpenalized fit (set a ridge penalty)");
  }

  const auto names = design_columns(ds);
  const Design design = build_design(ds);

  double lambda = cfg.ridge_lambda;
  IrlsRun run = run_irls(design, lambda, cfg, lambda == 0.0);
  if (lambda == 0.0) {
    const bool large = run.beta.cwiseAbs().maxCoeff() > kSeparationCoefficientLimit;
    if (!run.converged || run.singular || run.separated || large) {
      lambda = kFallbackRidgeLambda;
      run = run_irls(design, lambda, cfg, false);
    }
  }
  if (run.singular) {
    throw Error(ErrorCode::degenerate_design,
                "weighted design matrix is singular even with ridge penalty " + std::to_string(lambda),
                degenerate_columns(design, names));
  }

  FitReport report;
  report.iterations = run.iterations;
  report.converged = run.converged;
  report.max_gradient_norm = run.gradient_norm;
  report.penalty_used = lambda;
  report.rows = ds.rows.size();
  report.objective_trace = std::move(run.trace);
  report.coefficient_trace = std::move(run.betas);
  report.log_likelihood = objective(design, run.beta, 0.0);

  auto& m = report.coefficients;
  m.schema_id = ds.schema_id;
  m.model_id = ds.schema_id.empty() ? "calibrated" : ds.schema_id + "-calibrated";
  m.note = "fitted from " + (ds.provenance.empty() ? std::string("cohort data") : ds.provenance) + ", " +
           std::to_string(ds.rows.size()) + " rows";
  m.intercept = run.beta(0);
  Eigen::Index j = 1;
  for (const auto& f : ds.feature_ids) m.main_coefs[f] = run.beta(j++);
  for (const auto& p : ds.interaction_pairs) m.interaction_coefs[p] = run.beta(j++);

  const Eigen::MatrixXd h = weighted_normal(design, probabilities(design.x * run.beta), lambda);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
    for (Eigen::Index k = 0; k < inv.rows(); ++k) {
      report.standard_errors[names[static_cast<std::size_t>(k)]] = std::sqrt(inv(k, k));
    }
  }
  return report;
}

nlohmann::json fit_report_to_json(const FitReport& r) {
  auto doc = model_to_json(RiskModel{r.coefficients});
  doc["fit_diagnostics"] = {
      {"log_likelihood", r.log_likelihood},
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"max_gradient_norm", r.max_gradient_norm},
      {"penalty_used", r.penalty_used},
      {"standard_errors", r.standard_errors},
      {"rows", r.rows},
      {"objective_trace", r.objective_trace},
  };
  return doc;
}

}  // namespace infrisk
