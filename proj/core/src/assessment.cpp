#include "infrisk/assessment.hpp"

#include "infrisk/error.hpp"
#include "json_util.hpp"

namespace infrisk {

RiskAssessment make_assessment(double probability, const BandThresholds& thresholds) {
  RiskAssessment a;
  a.probability = probability;
  a.display = format_percentage(probability);
  a.band = band_for(probability, thresholds);
  return a;
}

nlohmann::json assessment_to_json(const RiskAssessment& a) {
  nlohmann::json doc;
  doc["probability"] = a.probability;
  doc["display"] = a.display;
  doc["band"] = to_string(a.band);
  doc["factor_deltas"] = nlohmann::json::array();
  for (const auto& d : a.factor_deltas) {
    doc["factor_deltas"].push_back({{"factor", d.factor}, {"delta", d.delta}});
  }
  if (a.interval) doc["interval"] = {{"lo", a.interval->lo}, {"hi", a.interval->hi}};
  return doc;
}

RiskAssessment assessment_from_json(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  detail::FieldReader r(doc, "assessment", errors);
  RiskAssessment a;
  if (auto v = r.number("probability")) a.probability = *v;
  if (auto v = r.string("display")) a.display = *v;
  if (auto v = r.string("band")) {
    if (auto b = parse_band(*v)) a.band = *b;
    else r.fail_key("band", "unknown band '" + *v + "'");
  }
  if (const auto* arr = r.array("factor_deltas")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      detail::FieldReader dr((*arr)[i], "assessment.factor_deltas[" + std::to_string(i) + "]", errors);
      FactorDelta d;
      if (auto v = dr.string("factor")) d.factor = *v;
      if (auto v = dr.number("delta")) d.delta = *v;
      dr.finish();
      a.factor_deltas.push_back(std::move(d));
    }
  }
  if (const auto* iv = r.object("interval", false)) {
    detail::FieldReader ir(*iv, "assessment.interval", errors);
    RiskInterval interval;
    if (auto v = ir.number("lo")) interval.lo = *v;
    if (auto v = ir.number("hi")) interval.hi = *v;
    ir.finish();
    a.interval = interval;
  }
  r.finish();
  if (!errors.empty()) throw Error(ErrorCode::parse, "malformed assessment", std::move(errors));
  return a;
}

std::string assessment_body(const RiskAssessment& a) { return assessment_to_json(a).dump() + "\n"; }

}  // namespace infrisk
