#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "intercom/error.hpp"
#include "intercom/lexicon.hpp"
#include "intercom/sentiment.hpp"

using namespace intercom;

namespace {

double held_out_accuracy(bool separable) {
  const auto lex = load_lexicon(INTERCOM_LEXICON_DIR);
  const auto train = fx::sentiment_set(1000, 21, separable);
  const auto test = fx::sentiment_set(4000, 22, separable);
  std::vector<FeatureVector> x;
  for (const auto& l : train.links) x.push_back(sentiment_features(l, train.corpus, std::span(&lex, 1)));
  ForestOptions o;
  o.trees = 100;
  o.seed = 23;
  o.threads = 1;
  const auto forest = train_forest(x, train.labels, o);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < test.links.size(); ++i) {
    const auto p = predict_sentiment(forest, test.links[i], test.corpus, std::span(&lex, 1));
    ok += (p.label == Sentiment::Negative) == (test.labels[i] == 1);
  }
  return static_cast<double>(ok) / static_cast<double>(test.links.size());
}

}  // namespace

TEST(Sentiment, FixtureGeneratorResolvesEveryLink) {
  const auto s = fx::sentiment_set(50, 1, true);
  EXPECT_EQ(s.links.size(), 50u);
  EXPECT_EQ(s.labels.size(), 50u);
}

TEST(Sentiment, SeparableHeldOut) { EXPECT_GE(held_out_accuracy(true), 0.95); }

TEST(Sentiment, LabelIndependentNearPrior) { EXPECT_NEAR(held_out_accuracy(false), 0.5, 0.05); }

TEST(Sentiment, FeaturesIgnoreWordsSharedWithTarget) {
  const auto lex = fx::small_lexicon();
  const auto c = Corpus::from_events({fx::post("t", "x", "B", 0, "we hate mondays"),
                                      fx::post("s", "y", "A", 10, "hate it r/B/comments/t angry")});
  const auto links = extract_crosslinks(c).links;
  ASSERT_EQ(links.size(), 1u);
  const auto f = sentiment_features(links[0], c, std::span(&lex, 1));
  // Remaining words: it, r, b, comments, t, angry.
  EXPECT_EQ(f.at("token_count"), 6.0);
  EXPECT_DOUBLE_EQ(f.at("lex.anger_rate"), 1.0 / 6.0);
}

TEST(Sentiment, AngerDenseFixtureIsNegative) {
  const auto lex = load_lexicon(INTERCOM_LEXICON_DIR);
  const auto train = fx::sentiment_set(400, 31, true);
  std::vector<FeatureVector> x;
  for (const auto& l : train.links) x.push_back(sentiment_features(l, train.corpus, std::span(&lex, 1)));
  ForestOptions o;
  o.trees = 50;
  o.seed = 1;
  const auto forest = train_forest(x, train.labels, o);
  const auto c = Corpus::from_events(
      {fx::post("t", "x", "B", 0, "a calm post"),
       fx::post("s", "y", "A", 10, "r/B/comments/t hate stupid idiots furious awful morons")});
  const auto p = predict_sentiment(forest, extract_crosslinks(c).links[0], c, std::span(&lex, 1));
  EXPECT_EQ(p.label, Sentiment::Negative);
  EXPECT_GT(p.probability_negative, 0.5);
}

TEST(Sentiment, SchemaMismatchDetected) {
  FeatureVector a;
  a.add("other", 1);
  FeatureVector b;
  b.add("other", 0);
  ForestOptions o;
  o.trees = 3;
  const auto forest = train_forest({a, b}, {1, 0}, o);
  const auto s = fx::sentiment_set(2, 1, true);
  EXPECT_THROW(predict_sentiment(forest, s.links[0], s.corpus, {}), SchemaMismatch);
}
