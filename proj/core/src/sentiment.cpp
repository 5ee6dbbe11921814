#include "intercom/sentiment.hpp"

#include "intercom/error.hpp"

namespace intercom {

FeatureVector sentiment_features(const CrossLink& link, const Corpus& corpus,
                                 std::span<const Lexicon> lexicons) {
  const Event* source = corpus.find_post(link.source_post);
  const Event* target = corpus.find_post(link.target_post);
  if (!source || !target) throw DataError("sentiment: cross-link posts missing from corpus");
  return extract_text_features(strip_shared_words(source->body, target->body), lexicons);
}

SentimentPrediction predict_sentiment(const Forest& forest, const CrossLink& link,
                                      const Corpus& corpus, std::span<const Lexicon> lexicons) {
  const double p = forest.predict_proba(sentiment_features(link, corpus, lexicons));
  return {p > 0.5 ? Sentiment::Negative : Sentiment::Neutral, p};
}

}  // namespace intercom
