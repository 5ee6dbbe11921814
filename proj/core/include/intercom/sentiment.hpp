#pragma once

#include <span>
#include <utility>

#include "intercom/corpus.hpp"
#include "intercom/features.hpp"
#include "intercom/forest.hpp"
#include "intercom/lexicon.hpp"
#include "intercom/mobilization.hpp"

namespace intercom {

// Features of the source post's text after removing words it shares with
// the target post.
FeatureVector sentiment_features(const CrossLink& link, const Corpus& corpus,
                                 std::span<const Lexicon> lexicons);

struct SentimentPrediction {
  Sentiment label = Sentiment::Neutral;
  double probability_negative = 0.0;
};

// Forest label 1 is "negative". Throws SchemaMismatch if the forest was
// trained on a different feature schema.
SentimentPrediction predict_sentiment(const Forest& forest, const CrossLink& link,
                                      const Corpus& corpus, std::span<const Lexicon> lexicons);

}  // namespace intercom
