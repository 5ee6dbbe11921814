#include "intercom/predictor.hpp"

#include <algorithm>

#include "intercom/error.hpp"
#include "intercom/text.hpp"

namespace intercom {

namespace {

double fraction(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

void add_vector(FeatureVector& fv, const std::string& prefix, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) fv.add(prefix + std::to_string(i), v[i]);
}

}  // namespace

FeatureVector baseline_features(const CrossLink& link, const Corpus& corpus,
                                std::span<const Lexicon> lexicons, const TfidfIndex& tfidf) {
  const Event* post = corpus.find_post(link.source_post);
  if (post == nullptr) throw DataError("baseline_features: unknown source post " + link.source_post);

  FeatureVector fv;
  fv.append(extract_text_features(post->body, lexicons), "post.");

  const SparseVector body = tfidf.vectorize(post->body);
  const SparseVector* src = tfidf.community_vector(link.source_community);
  const SparseVector* tgt = tfidf.community_vector(link.target_community);
  fv.add("tfidf.post_source", src ? cosine(body, *src) : 0.0);
  fv.add("tfidf.post_target", tgt ? cosine(body, *tgt) : 0.0);
  fv.add("tfidf.source_target",
         src && tgt ? tfidf.similarity(link.source_community, link.target_community) : 0.0);

  std::vector<const Event*> prior;
  for (std::size_t i : corpus.user_posts(link.author)) {
    const Event& p = corpus.posts()[i];
    if (p.timestamp < link.t0) prior.push_back(&p);
  }
  const auto comment_times = corpus.user_comment_times(link.author);
  const std::size_t prior_comments = static_cast<std::size_t>(
      std::lower_bound(comment_times.begin(), comment_times.end(), link.t0) - comment_times.begin());
  const auto in_community = [&](std::string_view community) {
    const auto times = corpus.user_comment_times(link.author, community);
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), link.t0) - times.begin());
  };
  std::size_t posts_in_target = 0;
  std::size_t posts_in_source = 0;
  for (const Event* p : prior) {
    posts_in_target += p->community == link.target_community;
    posts_in_source += p->community == link.source_community;
  }
  fv.add("author.prior_posts", static_cast<double>(prior.size()));
  fv.add("author.prior_comments", static_cast<double>(prior_comments));
  fv.add("author.post_fraction_target", fraction(posts_in_target, prior.size()));
  fv.add("author.post_fraction_source", fraction(posts_in_source, prior.size()));
  fv.add("author.comment_fraction_target", fraction(in_community(link.target_community), prior_comments));
  fv.add("author.comment_fraction_source", fraction(in_community(link.source_community), prior_comments));
  fv.add("author.no_history", prior.empty() && prior_comments == 0 ? 1.0 : 0.0);

  FeatureVector history = extract_text_features("", lexicons);
  std::fill(history.values.begin(), history.values.end(), 0.0);
  for (const Event* p : prior) {
    const FeatureVector f = extract_text_features(p->body, lexicons);
    for (std::size_t i = 0; i < f.size(); ++i) history.values[i] += f.values[i];
  }
  if (!prior.empty()) {
    for (double& v : history.values) v /= static_cast<double>(prior.size());
  }
  fv.append(history, "history.");
  return fv;
}

SocialSequence assemble_sequence(const CrossLink& link, const Corpus& corpus,
                                 const EmbeddingTable& social, const EmbeddingMatrix& words,
                                 int label, const SequenceOptions& options) {
  const std::size_t dim = social.users.dim();
  if (social.communities.dim() != dim || (words.size() > 0 && words.dim() != dim)) {
    throw std::invalid_argument("assemble_sequence: embedding dimensions differ");
  }
  const Event* post = corpus.find_post(link.source_post);
  if (post == nullptr) throw DataError("assemble_sequence: unknown source post " + link.source_post);

  std::vector<std::string> tokens = tokenize_words(post->body);
  if (tokens.size() > options.max_words) tokens.resize(options.max_words);

  SocialSequence seq;
  seq.label = label;
  seq.inputs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                     static_cast<Eigen::Index>(3 + tokens.size()));
  const auto put = [&](Eigen::Index col, std::span<const double> v) {
    for (std::size_t k = 0; k < dim; ++k) seq.inputs(static_cast<Eigen::Index>(k), col) = v[k];
  };
  const auto social_vector = [&](const EmbeddingMatrix& table, const std::string& id,
                                 const char* what, Eigen::Index col) {
    if (table.contains(id)) {
      put(col, table.at(id));
      return;
    }
    if (!options.back_off_to_mean || table.size() == 0) {
      throw DataError(std::string("assemble_sequence: no ") + what + " embedding for " + id);
    }
    const std::vector<double> mean = table.mean();
    put(col, mean);
    seq.backed_off = true;
  };
  social_vector(social.users, link.author, "user", 0);
  social_vector(social.communities, link.source_community, "community", 1);
  social_vector(social.communities, link.target_community, "community", 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int w = words.index_of(tokens[i]);
    if (w >= 0) put(static_cast<Eigen::Index>(3 + i), words.row(static_cast<std::size_t>(w)));
  }
  return seq;
}

FeatureVector ensemble_features(const FeatureVector& baseline, std::span<const double> user,
                                std::span<const double> source_community,
                                std::span<const double> target_community,
                                const Eigen::VectorXd& mean_hidden) {
  FeatureVector fv = baseline;
  add_vector(fv, "emb.user.", user);
  add_vector(fv, "emb.source.", source_community);
  add_vector(fv, "emb.target.", target_community);
  add_vector(fv, "lstm.hidden.",
             std::span<const double>(mean_hidden.data(), static_cast<std::size_t>(mean_hidden.size())));
  return fv;
}

}  // namespace intercom
