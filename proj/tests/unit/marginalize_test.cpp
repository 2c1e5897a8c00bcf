#include <gtest/gtest.h>

#include <cmath>

#include "infrisk/engine.hpp"
#include "infrisk/error.hpp"
#include "infrisk/marginalize.hpp"
#include "support.hpp"

using namespace infrisk;
namespace t = infrisk::testing;

TEST(Marginalize, MatchesEnumerationOnRandomSchemas) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto c = t::random_logistic_case(rng, kExhaustiveUnknownLimit);
    ASSERT_TRUE(check_schema(c.schema).empty());
    const double expected = t::enumerate_expectation(
        c.features, c.schema.priors, [&](const FeatureVector& f) { return t::reference_logistic_probability(f, c.model); });
    EXPECT_NEAR(assess(c.schema, RiskModel{c.model}, c.answers).probability, expected, 1e-12);
  }
}

TEST(Marginalize, WeightsSumToOneAndFixDegeneratePriors) {
  FeatureVector f;
  f.values = {{"known", 1.0}};
  f.unknown = {"a", "b", "c"};
  const std::map<std::string, double> priors{{"a", 0.3}, {"b", 1.0}, {"c", 0.0}};
  double total = 0.0;
  int calls = 0;
  for_each_completion(f, priors, [&](double w, const FeatureVector& done) {
    total += w;
    ++calls;
    EXPECT_TRUE(done.unknown.empty());
    EXPECT_EQ(done.values.at("b"), 1.0);
    EXPECT_EQ(done.values.at("c"), 0.0);
    EXPECT_EQ(done.values.at("known"), 1.0);
  });
  EXPECT_EQ(calls, 2);
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(Marginalize, MissingPriorIsConfigurationError) {
  FeatureVector f;
  f.unknown = {"a", "b"};
  try {
    marginalize(f, {{"a", 0.5}}, [](const FeatureVector&) { return 0.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::configuration);
    ASSERT_EQ(e.details().size(), 1u);
    EXPECT_NE(e.details()[0].find("b"), std::string::npos);
  }
}

TEST(Marginalize, NoUnknownsIsPlainEvaluation) {
  FeatureVector f;
  f.values = {{"a", 1.0}};
  EXPECT_EQ(marginalize(f, {}, [](const FeatureVector& x) { return x.values.at("a") * 0.25; }), 0.25);
}

TEST(Marginalize, SamplingBeyondLimitIsCloseAndDeterministic) {
  FeatureVector f;
  std::map<std::string, double> priors;
  for (int i = 0; i < 16; ++i) {
    const std::string id = "u" + std::to_string(i);
    f.unknown.insert(id);
    priors[id] = 0.1 + 0.05 * i;
  }
  auto risk = [](const FeatureVector& x) {
    double s = 0.0;
    for (const auto& [id, v] : x.values) s += v;
    return s / 16.0;
  };
  double mean_prior = 0.0;
  for (const auto& [id, p] : priors) mean_prior += p / 16.0;
  const double a = marginalize(f, priors, risk);
  EXPECT_EQ(a, marginalize(f, priors, risk));
  // 10,000 draws of a mean of 16 Bernoullis: standard error below 0.002.
  EXPECT_NEAR(a, mean_prior, 0.01);
  EXPECT_NEAR(t::enumerate_expectation(f, priors, risk), mean_prior, 1e-12);
}
