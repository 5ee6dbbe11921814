#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "intercom/corpus.hpp"

namespace intercom {

struct MatchedPair {
  std::string subject_id;
  std::string match_id;
  // Seconds for posts, absolute comment-count difference for users.
  std::int64_t match_distance = 0;
};

// Nearest-in-time post from the same community with no cross-link
// involvement; ties go to the earlier post. Throws NoMatch.
MatchedPair matched_post(const Corpus& corpus, const std::set<std::string>& linked_posts,
                         std::string_view post_id);

struct UserMatchQuery {
  std::string user;
  std::string community;     // home community of `user`
  std::string counterpart;   // the other community of the cross-link
  Timestamp at = 0;          // cross-link time
  std::string target_thread; // commenters here are not eligible
  std::uint64_t seed = 0;
};

// Member of `community` at `at` with the closest history comment count to
// `user`, counted over [at - 30d, at - 3d). Ties broken by seeded uniform
// choice. Throws NoMatch.
MatchedPair matched_user(const Corpus& corpus, const UserMatchQuery& query);

inline constexpr MembershipWindow kHistoryWindow{30 * kDay, 3 * kDay};

}  // namespace intercom
