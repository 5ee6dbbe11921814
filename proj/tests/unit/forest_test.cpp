#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "intercom/error.hpp"
#include "intercom/forest.hpp"

using namespace intercom;

namespace {

// Two uniform features; label 1 iff x0 + x1 > 1 (separable) or an independent coin.
Dataset make_data(std::size_t n, std::uint64_t seed, bool separable) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  d.schema = {"x0", "x1"};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    d.rows.push_back({a, b});
    d.labels.push_back(separable ? (a + b > 1.0 ? 1 : 0) : (u(rng) < 0.5 ? 1 : 0));
  }
  return d;
}

double accuracy(const Forest& f, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) ok += (f.predict_proba(d.rows[i]) > 0.5) == (d.labels[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(d.rows.size());
}

ForestOptions opts(int trees, std::uint64_t seed, int threads = 1) {
  ForestOptions o;
  o.trees = trees;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST(Forest, SeparableHeldOutAccuracy) {
  const auto f = Forest::train(make_data(500, 1, true), opts(100, 3));
  EXPECT_GE(accuracy(f, make_data(2000, 2, true)), 0.95);
}

TEST(Forest, LabelIndependentNearPrior) {
  const auto f = Forest::train(make_data(1000, 4, false), opts(100, 5));
  EXPECT_NEAR(accuracy(f, make_data(4000, 6, false)), 0.5, 0.05);
}

TEST(Forest, ProbabilitiesBounded) {
  const auto f = Forest::train(make_data(200, 7, false), opts(30, 8));
  for (const auto& row : make_data(300, 9, false).rows) {
    const double p = f.predict_proba(row);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Forest, UnanimousTreesGiveExtremeProbability) {
  // A single far-apart split: every bootstrap sample separates cleanly.
  Dataset d;
  d.schema = {"x"};
  for (int i = 0; i < 20; ++i) {
    d.rows.push_back({static_cast<double>(i < 10 ? i : 100 + i)});
    d.labels.push_back(i < 10 ? 0 : 1);
  }
  const auto f = Forest::train(d, opts(25, 1));
  const double lo = f.predict_proba(std::vector<double>{-5.0});
  const double hi = f.predict_proba(std::vector<double>{500.0});
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 1.0);
}

TEST(Forest, SeedReproducibleAndThreadInvariant) {
  const auto d = make_data(300, 10, true);
  const auto a = Forest::train(d, opts(40, 11, 1));
  const auto b = Forest::train(d, opts(40, 11, 1));
  const auto c = Forest::train(d, opts(40, 11, 4));
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);
  const auto other = Forest::train(d, opts(40, 12, 1));
  EXPECT_FALSE(a == other);
}

TEST(Forest, SaveLoadRoundTrip) {
  const auto f = Forest::train(make_data(200, 13, true), opts(20, 14));
  const auto path = fx::temp_dir("forest") / "m.forest";
  f.save(path);
  const auto g = Forest::load(path);
  EXPECT_TRUE(f == g);
  EXPECT_EQ(f.predict_proba(std::vector<double>{0.3, 0.9}), g.predict_proba(std::vector<double>{0.3, 0.9}));
}

TEST(Forest, LoadRejectsGarbage) {
  const auto path = fx::temp_dir("forest_bad") / "bad.forest";
  fx::write_text(path, "not a forest");
  EXPECT_THROW(Forest::load(path), DataError);
}

TEST(Forest, RejectsDegenerateTraining) {
  auto d = make_data(50, 15, true);
  std::fill(d.labels.begin(), d.labels.end(), 1);
  EXPECT_THROW(Forest::train(d, opts(5, 1)), DataError);
  Dataset one;
  one.schema = {"x"};
  one.rows = {{1.0}};
  one.labels = {1};
  EXPECT_THROW(Forest::train(one, opts(5, 1)), DataError);
}

TEST(Forest, SchemaChecks) {
  FeatureVector a;
  a.add("x", 1);
  FeatureVector b;
  b.add("y", 0);
  EXPECT_THROW(Dataset::from_features({a, b}, {1, 0}), SchemaMismatch);

  FeatureVector c;
  c.add("x", 0);
  const auto f = train_forest({a, c}, {1, 0}, opts(5, 1));
  EXPECT_THROW(f.predict_proba(b), SchemaMismatch);
  EXPECT_NO_THROW(f.predict_proba(c));
}
