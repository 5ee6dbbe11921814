#include "intercom/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "intercom/log.hpp"
#include "intercom/text.hpp"

namespace intercom {

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [_, v] : a) na += v * v;
  for (const auto& [_, v] : b) nb += v * v;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      dot += a[i++].second * b[j++].second;
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

TfidfIndex TfidfIndex::build(const Corpus& corpus, std::size_t vocab_size) {
  TfidfIndex idx;
  std::map<std::string, std::vector<std::string>> docs;
  std::unordered_map<std::string, std::size_t> freq;
  for (const Event& p : corpus.posts()) {
    auto& doc = docs[p.community];
    for (auto& tok : tokenize_words(p.body)) {
      ++freq[tok];
      doc.push_back(std::move(tok));
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);
  for (std::size_t i = 0; i < ranked.size(); ++i) idx.vocab_.emplace(ranked[i].first, static_cast<int>(i));

  idx.documents_ = docs.size();
  std::vector<std::size_t> df(ranked.size(), 0);
  for (const auto& [_, tokens] : docs) {
    std::vector<char> seen(ranked.size(), 0);
    for (const auto& t : tokens) {
      auto it = idx.vocab_.find(t);
      if (it != idx.vocab_.end() && !seen[it->second]) {
        seen[it->second] = 1;
        ++df[it->second];
      }
    }
  }
  idx.idf_.resize(ranked.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    idx.idf_[i] = df[i] == 0 ? 0.0
                             : std::log(static_cast<double>(idx.documents_) / static_cast<double>(df[i]));
  }
  for (const auto& [community, tokens] : docs) {
    idx.vectors_.emplace(community, idx.weigh(tokens));
    idx.tf_.emplace(community, idx.weigh(tokens, false));
  }
  return idx;
}

SparseVector TfidfIndex::weigh(const std::vector<std::string>& tokens, bool use_idf) const {
  std::map<int, double> counts;
  for (const auto& t : tokens) {
    auto it = vocab_.find(t);
    if (it != vocab_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  if (tokens.empty()) return v;
  const double len = static_cast<double>(tokens.size());
  for (const auto& [term, c] : counts) {
    const double w = use_idf ? (c / len) * idf_[term] : c / len;
    if (w != 0.0) v.emplace_back(term, w);
  }
  return v;
}

const SparseVector* TfidfIndex::community_vector(std::string_view community) const {
  auto it = vectors_.find(std::string(community));
  return it == vectors_.end() ? nullptr : &it->second;
}

SparseVector TfidfIndex::vectorize(std::string_view text) const { return weigh(tokenize_words(text)); }

double TfidfIndex::similarity(std::string_view a, std::string_view b) const {
  const SparseVector* va = community_vector(a);
  const SparseVector* vb = community_vector(b);
  if (!va || !vb) {
    log_warn("tfidf_similarity: community without posts (" + std::string(va ? b : a) + ")");
    return 0.0;
  }
  if (va->empty() && vb->empty()) return cosine(tf_.at(std::string(a)), tf_.at(std::string(b)));
  return cosine(*va, *vb);
}

double tfidf_similarity(std::string_view a, std::string_view b, const Corpus& corpus,
                        std::size_t vocab_size) {
  return TfidfIndex::build(corpus, vocab_size).similarity(a, b);
}

}  // namespace intercom
