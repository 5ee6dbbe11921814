#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "intercom/auc.hpp"
#include "intercom/error.hpp"
#include "intercom/lstm.hpp"
#include "oracles.hpp"

using namespace intercom;

namespace {

SocialSequence random_sequence(Eigen::Index input, Eigen::Index steps, std::uint64_t seed, int label = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  SocialSequence s;
  s.inputs.resize(input, steps);
  for (Eigen::Index i = 0; i < s.inputs.size(); ++i) s.inputs.data()[i] = n(rng);
  s.label = label;
  return s;
}

double test_auc(const PredictionDataset& d, const LstmParams& p) {
  const auto scores = score_all(d.sequences, d.split.test, p);
  std::vector<int> labels;
  for (auto i : d.split.test) labels.push_back(d.sequences[i].label);
  return auc(scores, labels);
}

LstmTrainOptions train_opts(int epochs, std::uint64_t seed) {
  LstmTrainOptions o;
  o.epochs = epochs;
  o.seed = seed;
  o.lr = 0.02;
  return o;
}

}  // namespace

TEST(LstmForward, ZeroWeightsGiveZeroStates) {
  const auto p = LstmParams::zeros(4, 3);
  const auto t = lstm_forward(random_sequence(4, 5, 1).inputs, p);
  EXPECT_TRUE(t.h.isZero(0.0));
  EXPECT_TRUE(t.c.isZero(0.0));
}

TEST(LstmForward, Causality) {
  const auto p = LstmParams::random(4, 3, 2);
  const auto s = random_sequence(4, 2, 3);
  const auto one = lstm_forward(s.inputs.leftCols(1), p);
  const auto two = lstm_forward(s.inputs, p);
  EXPECT_EQ(one.h.col(0), two.h.col(0));
}

TEST(LstmForward, MatchesScalarReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = LstmParams::random(5, 4, seed);
    const auto s = random_sequence(5, 3 + seed % 5, seed + 100);
    const auto t = lstm_forward(s.inputs, p);
    const auto ref = oracle::lstm_reference(p, s.inputs);
    for (Eigen::Index step = 0; step < s.length(); ++step) {
      for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(t.h(k, step), ref.h[step][k], 1e-12);
    }
    EXPECT_NEAR(predict_prob(s, p), ref.probability, 1e-12);
  }
}

TEST(LstmForward, NonFiniteInputReported) {
  const auto p = LstmParams::random(2, 2, 1);
  auto s = random_sequence(2, 4, 1);
  s.inputs(0, 2) = std::nan("");
  try {
    lstm_forward(s.inputs, p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos) << e.what();
  }
}

TEST(LstmInit, Ranges) {
  const auto p = LstmParams::random(6, 4, 9);
  const double bound = 1.0 / std::sqrt(4.0);
  EXPECT_LE(p.W.cwiseAbs().maxCoeff(), bound);
  EXPECT_LE(p.U.cwiseAbs().maxCoeff(), bound);
  EXPECT_LE(p.theta.cwiseAbs().maxCoeff(), bound);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(p.b(4 + k), 1.0);
  auto q = LstmParams::zeros(6, 4);
  q.assign(p.flatten());
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(p.parameter_count(), 16 * 6 + 16 * 4 + 16 + 4);
}

TEST(PredictProb, ZeroThetaIsHalf) {
  auto p = LstmParams::random(3, 5, 4);
  p.theta.setZero();
  EXPECT_EQ(predict_prob(random_sequence(3, 6, 5), p), 0.5);
}

TEST(PredictProb, HiddenPermutationInvariance) {
  const Eigen::Index h = 4;
  const auto p = LstmParams::random(3, h, 6);
  const std::vector<Eigen::Index> perm{2, 0, 3, 1};
  auto q = p;
  for (Eigen::Index g = 0; g < 4; ++g) {
    for (Eigen::Index k = 0; k < h; ++k) {
      q.W.row(g * h + k) = p.W.row(g * h + perm[k]);
      q.b(g * h + k) = p.b(g * h + perm[k]);
      for (Eigen::Index j = 0; j < h; ++j) q.U(g * h + k, j) = p.U(g * h + perm[k], perm[j]);
    }
  }
  for (Eigen::Index k = 0; k < h; ++k) q.theta(k) = p.theta(perm[k]);
  const auto s = random_sequence(3, 7, 7);
  EXPECT_NEAR(predict_prob(s, p), predict_prob(s, q), 1e-14);
}

TEST(PredictProb, PalindromeReversal) {
  const auto p = LstmParams::random(3, 4, 8);
  auto s = random_sequence(3, 5, 9);
  s.inputs.col(3) = s.inputs.col(1);
  s.inputs.col(4) = s.inputs.col(0);
  SocialSequence r = s;
  r.inputs = s.inputs.rowwise().reverse();
  EXPECT_EQ(predict_prob(s, p), predict_prob(r, p));
}

TEST(PredictProb, HandComputedFixture) {
  // h = 1, input = 1, all weights 0.5, theta = 2, single step x = 1.
  auto p = LstmParams::zeros(1, 1);
  p.W.setConstant(0.5);
  p.U.setConstant(0.5);
  p.b.setConstant(0.5);
  p.theta.setConstant(2.0);
  SocialSequence s;
  s.inputs = Eigen::MatrixXd::Ones(1, 1);
  const double sg = 1.0 / (1.0 + std::exp(-1.0));
  const double c = sg * std::tanh(1.0);
  const double h = sg * std::tanh(c);
  EXPECT_NEAR(predict_prob(s, p), 1.0 / (1.0 + std::exp(-2.0 * h)), 1e-15);
}

TEST(GradientCheck, TwentySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = LstmParams::random(4, 3, seed);
    const auto s = random_sequence(4, 3 + seed % 6, seed + 1000, static_cast<int>(seed % 2));
    EXPECT_LT(gradient_check(p, s), 1e-4) << seed;
  }
}

TEST(GradientCheck, MinimalSequence) {
  const auto p = LstmParams::random(3, 2, 5);
  EXPECT_LT(gradient_check(p, random_sequence(3, 3, 6)), 1e-4);
}

TEST(GradientCheck, DetectsCorruptedForgetGate) {
  const auto p = LstmParams::random(4, 3, 1);
  const auto s = random_sequence(4, 5, 2);
  const GradientFn corrupted = [](const SocialSequence& seq, const LstmParams& params) {
    auto g = loss_gradient(seq, params);
    const Eigen::Index h = params.hidden_size();
    g.grad.W.middleRows(h, h) *= 0.5;
    g.grad.U.middleRows(h, h) *= 0.5;
    g.grad.b.segment(h, h) *= 0.5;
    return g;
  };
  EXPECT_GT(gradient_check(p, s, corrupted), 1e-2);
}

TEST(Split, DisjointAndReproducible) {
  const auto a = split_80_10_10(105, 3);
  const auto b = split_80_10_10(105, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 84u);
  EXPECT_EQ(a.validation.size(), 10u);
  EXPECT_EQ(a.test.size(), 11u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 105u);
}

TEST(Train, MemorizesSingleExample) {
  PredictionDataset d;
  d.sequences.push_back(random_sequence(3, 4, 1, 1));
  d.split.train = {0};
  auto o = train_opts(400, 1);
  o.lr = 0.05;
  const auto r = train_lstm(d, LstmParams::random(3, 4, 2), o);
  EXPECT_LT(example_loss(d.sequences[0], r.params), 1e-3);
}

TEST(Train, EmptyTrainingSplitRejected) {
  PredictionDataset d;
  EXPECT_THROW(train_lstm(d, LstmParams::random(2, 2, 1)), DataError);
}

TEST(Train, DivergenceAborts) {
  const auto d = fx::planted_sequences(200, 4, 5);
  auto o = train_opts(5, 1);
  o.lr = 1e4;
  o.divergence_factor = 1.5;
  EXPECT_THROW(train_lstm(d, LstmParams::random(4, 4, 1), o), Error);
}

TEST(Train, PlantedRule) {
  const auto d = fx::planted_sequences(2000, 8, 11);
  const auto r = train_lstm(d, LstmParams::random(8, 8, 12), train_opts(10, 13));
  EXPECT_GE(test_auc(d, r.params), 0.95);
  ASSERT_TRUE(r.best_validation_auc.has_value());
  EXPECT_EQ(r.log.size(), 10u);
}

TEST(Train, ShuffledLabelsNearChance) {
  const auto d = fx::planted_sequences(10000, 8, 14, true);
  const auto r = train_lstm(d, LstmParams::random(8, 8, 15), train_opts(3, 16));
  EXPECT_NEAR(test_auc(d, r.params), 0.5, 0.05);
  EXPECT_NEAR(*r.best_validation_auc, 0.5, 0.08);
}

TEST(Train, ThreadCountDoesNotChangeResult) {
  const auto d = fx::planted_sequences(300, 4, 17);
  auto o = train_opts(2, 18);
  const auto a = train_lstm(d, LstmParams::random(4, 4, 19), o);
  o.threads = 3;
  const auto b = train_lstm(d, LstmParams::random(4, 4, 19), o);
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
}

TEST(Checkpoint, RoundTrip) {
  LstmCheckpoint c;
  c.params = LstmParams::random(3, 2, 4);
  c.seed = 77;
  c.epochs = 5;
  c.best_epoch = 3;
  c.best_validation_auc = 0.81;
  const auto path = fx::temp_dir("lstm") / "m.bin";
  save_checkpoint(c, path);
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.params.flatten(), c.params.flatten());
  EXPECT_EQ(back.params.hidden_size(), 2);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.best_epoch, 3);
  EXPECT_EQ(back.best_validation_auc, 0.81);
  fx::write_text(path, "ICLSTM");
  EXPECT_THROW(load_checkpoint(path), DataError);
}
