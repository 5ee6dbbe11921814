#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "intercom/corpus.hpp"

namespace intercom {

using SparseVector = std::vector<std::pair<int, double>>;  // sorted by term id

double cosine(const SparseVector& a, const SparseVector& b);

// tf-idf vectors of each community's concatenated post text.
// tf = term count / document token count; idf = ln(N / df) over the N
// communities that have at least one post. The vocabulary is the top
// `vocab_size` words of the whole corpus by frequency (ties alphabetical).
class TfidfIndex {
 public:
  static TfidfIndex build(const Corpus& corpus, std::size_t vocab_size = 10000);

  // Cosine similarity in [0, 1]; 0 with a warning when either community has no posts.
  // When both tf-idf vectors vanish (every term occurs in every community) the raw tf
  // vectors are compared instead.
  double similarity(std::string_view a, std::string_view b) const;

  const SparseVector* community_vector(std::string_view community) const;
  // Vectorizes free text with the index's vocabulary and idf weights.
  SparseVector vectorize(std::string_view text) const;

  std::size_t vocabulary_size() const { return vocab_.size(); }
  std::size_t document_count() const { return documents_; }

 private:
  SparseVector weigh(const std::vector<std::string>& tokens, bool use_idf = true) const;

  std::unordered_map<std::string, int> vocab_;
  std::vector<double> idf_;
  std::unordered_map<std::string, SparseVector> vectors_;
  std::unordered_map<std::string, SparseVector> tf_;
  std::size_t documents_ = 0;
};

double tfidf_similarity(std::string_view a, std::string_view b, const Corpus& corpus,
                        std::size_t vocab_size = 10000);

}  // namespace intercom
