#pragma once

#include <span>
#include <string>
#include <vector>

#include "intercom/corpus.hpp"
#include "intercom/embed.hpp"
#include "intercom/features.hpp"
#include "intercom/forest.hpp"
#include "intercom/lexicon.hpp"
#include "intercom/lstm.hpp"
#include "intercom/tfidf.hpp"

namespace intercom {

// Hand-crafted features of one cross-link:
//   post.*     text features of the source post
//   tfidf.*    post/community and source/target community similarities
//   author.*   prior activity of the post author (before t0)
//   history.*  text features averaged over the author's earlier posts
// Authors without earlier posts or comments get zero activity and history
// features and author.no_history = 1.
FeatureVector baseline_features(const CrossLink& link, const Corpus& corpus,
                                std::span<const Lexicon> lexicons, const TfidfIndex& tfidf);

struct SequenceOptions {
  std::size_t max_words = 50;
  // Replace a missing user or community vector with the table mean instead of throwing.
  bool back_off_to_mean = false;
};

// [u_author, c_source, c_target, w_1 ... w_L]; L <= max_words, unknown
// words are zero vectors. Throws DataError for a missing user/community
// vector unless backing off, and std::invalid_argument when dims differ.
SocialSequence assemble_sequence(const CrossLink& link, const Corpus& corpus,
                                 const EmbeddingTable& social, const EmbeddingMatrix& words,
                                 int label, const SequenceOptions& options = {});

// Baseline features, author and community embeddings and the LSTM's mean
// hidden state in one vector.
FeatureVector ensemble_features(const FeatureVector& baseline, std::span<const double> user,
                                std::span<const double> source_community,
                                std::span<const double> target_community,
                                const Eigen::VectorXd& mean_hidden);

inline constexpr int kEnsembleTrees = 500;

}  // namespace intercom
