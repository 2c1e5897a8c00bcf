#include <benchmark/benchmark.h>

#include <filesystem>

#include "infrisk/answers.hpp"
#include "infrisk/assessment.hpp"
#include "infrisk/engine.hpp"
#include "infrisk/model_io.hpp"
#include "infrisk/schema.hpp"

namespace {

using namespace infrisk;

const std::filesystem::path kData = INFRISK_BENCH_DATA_DIR;

QuestionnaireSchema schema(const std::string& id) { return load_schema_file(kData / "schemas" / (id + ".json")); }
RiskModel model(const std::string& id) { return load_model_file(kData / "models" / (id + ".json")); }

AnswerSet patient_answers(bool keep_tri_states) {
  const auto s = schema("childbirth-patient");
  AnswerSet a;
  a.schema_id = s.id;
  for (const auto& q : s.questions) {
    if (q.widget == Widget::slider) continue;
    if (q.widget == Widget::tri_state && !keep_tri_states) continue;  // left unknown
    a.answers[q.id] = false;
  }
  return a;
}

void BM_AssessPatientComplete(benchmark::State& state) {
  const auto s = schema("childbirth-patient");
  const auto m = model(s.id);
  const auto a = patient_answers(true);
  for (auto _ : state) benchmark::DoNotOptimize(assess(s, m, a));
}
BENCHMARK(BM_AssessPatientComplete);

// Every tri-state question unanswered, so the engine enumerates completions.
void BM_AssessPatientUnknowns(benchmark::State& state) {
  const auto s = schema("childbirth-patient");
  const auto m = model(s.id);
  const auto a = patient_answers(false);
  for (auto _ : state) benchmark::DoNotOptimize(assess(s, m, a));
}
BENCHMARK(BM_AssessPatientUnknowns);

void BM_AssessSti(benchmark::State& state) {
  const auto s = schema("sti-hiv");
  const auto m = model(s.id);
  AnswerSet a;
  a.schema_id = s.id;
  a.answers["contact_type"] = std::string("receptive_anal");
  a.answers["acts"] = 10.0;
  a.answers["partner_msm"] = true;
  a.answers["condom"] = true;
  for (auto _ : state) benchmark::DoNotOptimize(assess(s, m, a));
}
BENCHMARK(BM_AssessSti);

void BM_AssessmentBody(benchmark::State& state) {
  const auto s = schema("childbirth-hospital");
  const auto m = model(s.id);
  AnswerSet a;
  a.schema_id = s.id;
  const auto r = assess(s, m, a);
  for (auto _ : state) benchmark::DoNotOptimize(assessment_body(r));
}
BENCHMARK(BM_AssessmentBody);

}  // namespace
