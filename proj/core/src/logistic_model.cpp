#include "infrisk/logistic_model.hpp"

#include <cmath>

#include "infrisk/error.hpp"

namespace infrisk {

double FeatureVector::value_or_zero(const std::string& feature) const {
  auto it = values.find(feature);
  return it == values.end() ? 0.0 : it->second;
}

std::vector<std::string> check_logistic_model(const LogisticModel& m) {
  std::vector<std::string> v;
  if (!std::isfinite(m.intercept)) v.push_back("intercept is not finite");
  for (const auto& [f, b] : m.main_coefs) {
    if (!std::isfinite(b)) v.push_back("coefficient '" + f + "' is not finite");
  }
  for (const auto& [pair, b] : m.interaction_coefs) {
    const std::string name = "interaction (" + pair.first + ", " + pair.second + ")";
    if (pair.first == pair.second) v.push_back(name + " must reference two distinct features");
    for (const auto* f : {&pair.first, &pair.second}) {
      if (!m.main_coefs.count(*f)) v.push_back(name + " references undeclared feature '" + *f + "'");
    }
    if (!std::isfinite(b)) v.push_back(name + " coefficient is not finite");
  }
  if (m.noise.std_dev < 0.0 || !std::isfinite(m.noise.std_dev)) v.push_back("noise std_dev must be >= 0");
  if (m.noise.samples < 1) v.push_back("noise samples must be positive");
  return v;
}

double linear_predictor(const FeatureVector& features, const LogisticModel& model) {
  if (!features.unknown.empty()) {
    throw Error(ErrorCode::validation, "linear predictor needs every unknown resolved first");
  }
  double y = model.intercept;
  for (const auto& [f, b] : model.main_coefs) {
    y += b * features.value_or_zero(f);
  }
  for (const auto& [pair, b] : model.interaction_coefs) {
    y += b * features.value_or_zero(pair.first) * features.value_or_zero(pair.second);
  }
  return y;
}

}  // namespace infrisk
