#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace intercom {

using Timestamp = std::int64_t;  // epoch seconds, UTC

inline constexpr Timestamp kHour = 3600;
inline constexpr Timestamp kDay = 24 * kHour;

enum class EventKind { Post, Comment };

struct Event {
  EventKind kind = EventKind::Post;
  std::string id;
  std::string author;
  std::string community;
  Timestamp timestamp = 0;
  std::string thread_id;  // comments only
  std::string parent_id;  // comments only; equals thread_id for top-level comments
  std::string body;
};

// Half-open [begin, end).
struct TimeWindow {
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return t >= begin && t < end; }
};

std::size_t count_in_window(std::span<const Timestamp> sorted_times, TimeWindow w);

struct LoadStats {
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::size_t rejected = 0;         // all dropped records, including the two below
  std::size_t duplicate_ids = 0;
  std::size_t orphan_comments = 0;  // thread missing or in another community
  std::vector<std::string> first_errors;
};

// Immutable indexed store of posts and comments. Every index holds positions
// into posts() or comments(); all per-key lists are sorted by (timestamp, id).
class Corpus {
 public:
  Corpus() = default;

  static Corpus from_events(std::vector<Event> events, LoadStats* stats = nullptr);

  const std::vector<Event>& posts() const { return posts_; }
  const std::vector<Event>& comments() const { return comments_; }

  const Event* find_post(std::string_view id) const;
  const Event* find_comment(std::string_view id) const;

  std::span<const std::size_t> thread_comments(std::string_view post_id) const;
  std::span<const std::size_t> community_posts(std::string_view community) const;
  std::span<const std::size_t> community_comments(std::string_view community) const;
  std::span<const std::size_t> user_posts(std::string_view user) const;

  std::span<const Timestamp> user_comment_times(std::string_view user) const;
  std::span<const Timestamp> user_comment_times(std::string_view user,
                                                std::string_view community) const;

  // Sorted community ids (as spelled in the log).
  const std::vector<std::string>& communities() const { return communities_; }
  const std::vector<std::string>& users() const { return users_; }
  bool has_community(std::string_view community) const;
  // Case-insensitive lookup of a community name.
  std::optional<std::string> canonical_community(std::string_view name) const;

  std::size_t thread_count() const { return thread_index_.size(); }
  Timestamp min_time() const { return min_time_; }
  Timestamp max_time() const { return max_time_; }

 private:
  struct UserIndex {
    std::vector<Timestamp> comment_times;
    std::map<std::string, std::vector<Timestamp>, std::less<>> comment_times_by_community;
    std::vector<std::size_t> posts;
  };

  std::vector<Event> posts_;
  std::vector<Event> comments_;
  std::unordered_map<std::string, std::size_t> post_by_id_;
  std::unordered_map<std::string, std::size_t> comment_by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> thread_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> community_posts_;
  std::unordered_map<std::string, std::vector<std::size_t>> community_comments_;
  std::unordered_map<std::string, UserIndex> user_index_;
  std::unordered_map<std::string, std::string> community_by_lower_;
  std::vector<std::string> communities_;
  std::vector<std::string> users_;
  Timestamp min_time_ = 0;
  Timestamp max_time_ = 0;
};

// Parses one event-log line. Returns nullopt and fills `error` on schema violation.
std::optional<Event> parse_event_line(std::string_view line, std::string* error = nullptr);
std::string serialize_event(const Event& e);

struct LoadResult {
  Corpus corpus;
  LoadStats stats;
};

// Throws DataError when the file cannot be read. Malformed lines are skipped
// and counted.
LoadResult load_events(const std::filesystem::path& path);

// ---------------------------------------------------------------- cross-links

struct CrossLink {
  std::string source_post;
  std::string target_post;
  std::string source_community;
  std::string target_community;
  Timestamp t0 = 0;  // source post creation
  std::string author;
};

struct CrosslinkOptions {
  // Accepted URL hosts (lowercase). Empty accepts any host and bare r/... paths.
  std::vector<std::string> host_allowlist;
  // Half-width of the analysis window used by overlap removal.
  Timestamp analysis_half_window = 12 * kHour;
};

struct CrosslinkStats {
  std::size_t candidates = 0;  // source posts carrying at least one link pattern
  std::size_t missing_target = 0;
  std::size_t community_mismatch = 0;
  std::size_t host_rejected = 0;
  std::size_t self_links = 0;
  std::size_t overlap_removed = 0;
};

struct CrosslinkResult {
  std::vector<CrossLink> links;  // sorted by (t0, source_post)
  CrosslinkStats stats;
  // Every post taking part in any resolved cross-link, before overlap removal.
  std::set<std::string> involved_posts;
};

CrosslinkResult extract_crosslinks(const Corpus& corpus, const CrosslinkOptions& options = {});

// ---------------------------------------------------------------- membership

struct MembershipWindow {
  Timestamp lookback = 30 * kDay;
  // Comments in [at - guard, at) are ignored (history exclusion).
  Timestamp guard = 0;

  TimeWindow at(Timestamp t) const { return {t - lookback, t - guard}; }
};

// Users with >= 1 comment in `community` and none in `excluded` during the
// membership window ending at `at`.
std::set<std::string> members(const Corpus& corpus, std::string_view community, Timestamp at,
                              std::string_view excluded, const MembershipWindow& window = {});

struct UserActivity {
  std::size_t count_in_community = 0;
  std::size_t count_total = 0;
  double fraction = 0.0;
};

UserActivity user_activity(const Corpus& corpus, std::string_view user, std::string_view community,
                           TimeWindow window);

}  // namespace intercom
