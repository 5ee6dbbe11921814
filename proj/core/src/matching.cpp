#include "intercom/matching.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "intercom/error.hpp"
#include "intercom/random.hpp"

namespace intercom {

MatchedPair matched_post(const Corpus& corpus, const std::set<std::string>& linked_posts,
                         std::string_view post_id) {
  const Event* p = corpus.find_post(post_id);
  if (!p) throw NoMatch("matched_post: unknown post " + std::string(post_id));

  const Event* best = nullptr;
  std::int64_t best_distance = std::numeric_limits<std::int64_t>::max();
  // community_posts is time-ordered, so the first candidate at a given
  // distance is the earlier one.
  for (std::size_t i : corpus.community_posts(p->community)) {
    const Event& q = corpus.posts()[i];
    if (q.id == p->id || linked_posts.count(q.id)) continue;
    const std::int64_t d = q.timestamp > p->timestamp ? q.timestamp - p->timestamp
                                                      : p->timestamp - q.timestamp;
    if (d < best_distance) {
      best = &q;
      best_distance = d;
    }
  }
  if (!best) throw NoMatch("matched_post: no link-free post in " + p->community);
  return {p->id, best->id, best_distance};
}

MatchedPair matched_user(const Corpus& corpus, const UserMatchQuery& q) {
  const TimeWindow history = kHistoryWindow.at(q.at);
  auto pool = members(corpus, q.community, q.at, q.counterpart, kHistoryWindow);

  std::set<std::string> thread_authors;
  for (std::size_t i : corpus.thread_comments(q.target_thread)) {
    thread_authors.insert(corpus.comments()[i].author);
  }

  const auto own = static_cast<std::int64_t>(
      count_in_window(corpus.user_comment_times(q.user, q.community), history));

  std::vector<const std::string*> best;
  std::int64_t best_distance = std::numeric_limits<std::int64_t>::max();
  for (const auto& cand : pool) {
    if (cand == q.user || thread_authors.count(cand)) continue;
    const auto n = static_cast<std::int64_t>(
        count_in_window(corpus.user_comment_times(cand, q.community), history));
    const std::int64_t d = n > own ? n - own : own - n;
    if (d < best_distance) {
      best.clear();
      best_distance = d;
    }
    if (d == best_distance) best.push_back(&cand);
  }
  if (best.empty()) {
    throw NoMatch("matched_user: no eligible member of " + q.community + " for " + q.user);
  }
  Rng rng(q.seed);
  return {q.user, *best[rng.index(best.size())], best_distance};
}

}  // namespace intercom
