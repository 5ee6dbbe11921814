#include "intercom/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include "intercom/error.hpp"
#include "intercom/log.hpp"
#include "intercom/text.hpp"
#include "json.hpp"

namespace intercom {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxRecordedErrors = 20;

template <typename Map>
std::span<const typename Map::mapped_type::value_type> lookup_span(const Map& m,
                                                                   std::string_view key) {
  auto it = m.find(std::string(key));
  if (it == m.end()) return {};
  return it->second;
}

bool event_less(const Event& a, const Event& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

const std::string* string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return nullptr;
  return it->get_ptr<const std::string*>();
}

}  // namespace

std::size_t count_in_window(std::span<const Timestamp> sorted_times, TimeWindow w) {
  if (w.end <= w.begin) return 0;
  auto lo = std::lower_bound(sorted_times.begin(), sorted_times.end(), w.begin);
  auto hi = std::lower_bound(lo, sorted_times.end(), w.end);
  return static_cast<std::size_t>(hi - lo);
}

std::optional<Event> parse_event_line(std::string_view line, std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<Event> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return fail("not a JSON object");

  Event e;
  const std::string* kind = string_field(obj, "kind");
  if (!kind) return fail("missing `kind`");
  if (*kind == "post") {
    e.kind = EventKind::Post;
  } else if (*kind == "comment") {
    e.kind = EventKind::Comment;
  } else {
    return fail("unknown kind `" + *kind + "`");
  }
  for (auto [key, dst] : {std::pair{"id", &e.id}, std::pair{"author", &e.author},
                          std::pair{"community", &e.community}}) {
    const std::string* v = string_field(obj, key);
    if (!v || v->empty()) return fail(std::string("missing `") + key + "`");
    *dst = *v;
  }
  auto ts = obj.find("timestamp");
  if (ts == obj.end() || !ts->is_number_integer()) return fail("missing integer `timestamp`");
  e.timestamp = ts->get<std::int64_t>();
  if (e.timestamp < 0) return fail("negative `timestamp`");

  if (e.kind == EventKind::Comment) {
    const std::string* thread = string_field(obj, "thread_id");
    if (!thread || thread->empty()) return fail("comment missing `thread_id`");
    e.thread_id = *thread;
    const std::string* parent = string_field(obj, "parent_id");
    e.parent_id = (parent && !parent->empty()) ? *parent : e.thread_id;
  }
  if (auto it = obj.find("body"); it != obj.end()) {
    if (!it->is_string()) return fail("`body` is not a string");
    e.body = it->get<std::string>();
  }
  return e;
}

std::string serialize_event(const Event& e) {
  // Keys emitted in fixed order so generated logs are byte-stable.
  std::string out = "{\"kind\":";
  out += e.kind == EventKind::Post ? "\"post\"" : "\"comment\"";
  out += ",\"id\":" + json(e.id).dump();
  out += ",\"author\":" + json(e.author).dump();
  out += ",\"community\":" + json(e.community).dump();
  out += ",\"timestamp\":" + std::to_string(e.timestamp);
  if (e.kind == EventKind::Comment) {
    out += ",\"thread_id\":" + json(e.thread_id).dump();
    out += ",\"parent_id\":" + json(e.parent_id).dump();
  }
  out += ",\"body\":" + json(e.body).dump() + "}";
  return out;
}

Corpus Corpus::from_events(std::vector<Event> events, LoadStats* stats) {
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  auto record = [&](std::string msg) {
    ++st.rejected;
    if (st.first_errors.size() < kMaxRecordedErrors) st.first_errors.push_back(std::move(msg));
  };

  Corpus c;
  std::vector<Event> comments;
  for (auto& e : events) {
    if (e.kind == EventKind::Post) {
      if (c.post_by_id_.count(e.id)) {
        ++st.duplicate_ids;
        record("duplicate post id " + e.id);
        continue;
      }
      c.post_by_id_.emplace(e.id, 0);
      c.posts_.push_back(std::move(e));
    } else {
      comments.push_back(std::move(e));
    }
  }
  std::unordered_map<std::string, std::string> post_community;
  for (const auto& p : c.posts_) post_community.emplace(p.id, p.community);
  for (auto& e : comments) {
    auto it = post_community.find(e.thread_id);
    if (it == post_community.end() || it->second != e.community) {
      ++st.orphan_comments;
      record("comment " + e.id + " has no thread " + e.thread_id + " in " + e.community);
      continue;
    }
    if (c.comment_by_id_.count(e.id)) {
      ++st.duplicate_ids;
      record("duplicate comment id " + e.id);
      continue;
    }
    c.comment_by_id_.emplace(e.id, 0);
    c.comments_.push_back(std::move(e));
  }

  std::sort(c.posts_.begin(), c.posts_.end(), event_less);
  std::sort(c.comments_.begin(), c.comments_.end(), event_less);

  std::set<std::string> communities;
  std::set<std::string> users;
  bool first = true;
  auto touch_time = [&](Timestamp t) {
    if (first) {
      c.min_time_ = c.max_time_ = t;
      first = false;
    }
    c.min_time_ = std::min(c.min_time_, t);
    c.max_time_ = std::max(c.max_time_, t);
  };

  for (std::size_t i = 0; i < c.posts_.size(); ++i) {
    const Event& p = c.posts_[i];
    c.post_by_id_[p.id] = i;
    c.thread_index_[p.id];
    c.community_posts_[p.community].push_back(i);
    c.user_index_[p.author].posts.push_back(i);
    communities.insert(p.community);
    users.insert(p.author);
    touch_time(p.timestamp);
  }
  for (std::size_t i = 0; i < c.comments_.size(); ++i) {
    const Event& e = c.comments_[i];
    c.comment_by_id_[e.id] = i;
    c.thread_index_[e.thread_id].push_back(i);
    c.community_comments_[e.community].push_back(i);
    auto& ui = c.user_index_[e.author];
    ui.comment_times.push_back(e.timestamp);
    ui.comment_times_by_community[e.community].push_back(e.timestamp);
    communities.insert(e.community);
    users.insert(e.author);
    touch_time(e.timestamp);
  }
  c.communities_.assign(communities.begin(), communities.end());
  c.users_.assign(users.begin(), users.end());
  for (const auto& name : c.communities_) {
    c.community_by_lower_.emplace(to_lower(name), name);
  }
  return c;
}

const Event* Corpus::find_post(std::string_view id) const {
  auto it = post_by_id_.find(std::string(id));
  return it == post_by_id_.end() ? nullptr : &posts_[it->second];
}

const Event* Corpus::find_comment(std::string_view id) const {
  auto it = comment_by_id_.find(std::string(id));
  return it == comment_by_id_.end() ? nullptr : &comments_[it->second];
}

std::span<const std::size_t> Corpus::thread_comments(std::string_view post_id) const {
  return lookup_span(thread_index_, post_id);
}

std::span<const std::size_t> Corpus::community_posts(std::string_view community) const {
  return lookup_span(community_posts_, community);
}

std::span<const std::size_t> Corpus::community_comments(std::string_view community) const {
  return lookup_span(community_comments_, community);
}

std::span<const std::size_t> Corpus::user_posts(std::string_view user) const {
  auto it = user_index_.find(std::string(user));
  if (it == user_index_.end()) return {};
  return it->second.posts;
}

std::span<const Timestamp> Corpus::user_comment_times(std::string_view user) const {
  auto it = user_index_.find(std::string(user));
  if (it == user_index_.end()) return {};
  return it->second.comment_times;
}

std::span<const Timestamp> Corpus::user_comment_times(std::string_view user,
                                                      std::string_view community) const {
  auto it = user_index_.find(std::string(user));
  if (it == user_index_.end()) return {};
  auto jt = it->second.comment_times_by_community.find(community);
  if (jt == it->second.comment_times_by_community.end()) return {};
  return jt->second;
}

bool Corpus::has_community(std::string_view community) const {
  return std::binary_search(communities_.begin(), communities_.end(), community);
}

std::optional<std::string> Corpus::canonical_community(std::string_view name) const {
  auto it = community_by_lower_.find(to_lower(name));
  if (it == community_by_lower_.end()) return std::nullopt;
  return it->second;
}

LoadResult load_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read event log " + path.string());

  LoadResult result;
  LoadStats& st = result.stats;
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    ++st.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      ++st.blank;
      continue;
    }
    std::string err;
    auto e = parse_event_line(line, &err);
    if (!e) {
      ++st.rejected;
      if (st.first_errors.size() < kMaxRecordedErrors) {
        st.first_errors.push_back("line " + std::to_string(st.lines) + ": " + err);
      }
      continue;
    }
    events.push_back(std::move(*e));
  }
  if (in.bad()) throw DataError("read error on " + path.string());
  result.corpus = Corpus::from_events(std::move(events), &st);
  if (st.rejected > 0) {
    log_warn("event log " + path.string() + ": rejected " + std::to_string(st.rejected) +
             " of " + std::to_string(st.lines) + " lines");
  }
  return result;
}

CrosslinkResult extract_crosslinks(const Corpus& corpus, const CrosslinkOptions& options) {
  static const std::regex kLink(
      R"((?:(?:https?://)?([A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)+))?/?\br/([A-Za-z0-9_]+)/comments/([A-Za-z0-9_]+))",
      std::regex::ECMAScript | std::regex::icase);

  CrosslinkResult result;
  auto& st = result.stats;
  std::vector<CrossLink> resolved;

  for (const Event& post : corpus.posts()) {
    bool saw_pattern = false;
    std::optional<CrossLink> link;
    for (auto it = std::sregex_iterator(post.body.begin(), post.body.end(), kLink);
         it != std::sregex_iterator() && !link; ++it) {
      const auto& m = *it;
      if (!saw_pattern) {
        saw_pattern = true;
        ++st.candidates;
      }
      if (!options.host_allowlist.empty()) {
        const std::string host = to_lower(m[1].str());
        if (!m[1].matched || std::find(options.host_allowlist.begin(),
                                       options.host_allowlist.end(),
                                       host) == options.host_allowlist.end()) {
          ++st.host_rejected;
          continue;
        }
      }
      const Event* target = corpus.find_post(m[3].str());
      if (!target) {
        ++st.missing_target;
        continue;
      }
      if (to_lower(target->community) != to_lower(m[2].str())) {
        ++st.community_mismatch;
        continue;
      }
      if (target->community == post.community) {
        ++st.self_links;
        continue;
      }
      link = CrossLink{post.id,        target->id,     post.community,
                       target->community, post.timestamp, post.author};
    }
    if (link) {
      result.involved_posts.insert(link->source_post);
      result.involved_posts.insert(link->target_post);
      resolved.push_back(std::move(*link));
    }
  }

  // Overlap removal: per target, keep a link only if its analysis window does
  // not intersect the window of the previously kept link.
  std::sort(resolved.begin(), resolved.end(), [](const CrossLink& a, const CrossLink& b) {
    if (a.target_post != b.target_post) return a.target_post < b.target_post;
    if (a.t0 != b.t0) return a.t0 < b.t0;
    return a.source_post < b.source_post;
  });
  const Timestamp min_gap = 2 * options.analysis_half_window;
  for (std::size_t i = 0; i < resolved.size();) {
    std::size_t j = i;
    Timestamp last_kept = 0;
    bool any = false;
    for (; j < resolved.size() && resolved[j].target_post == resolved[i].target_post; ++j) {
      if (any && resolved[j].t0 - last_kept < min_gap) {
        ++st.overlap_removed;
        continue;
      }
      last_kept = resolved[j].t0;
      any = true;
      result.links.push_back(resolved[j]);
    }
    i = j;
  }
  std::sort(result.links.begin(), result.links.end(), [](const CrossLink& a, const CrossLink& b) {
    if (a.t0 != b.t0) return a.t0 < b.t0;
    return a.source_post < b.source_post;
  });
  return result;
}

std::set<std::string> members(const Corpus& corpus, std::string_view community, Timestamp at,
                              std::string_view excluded, const MembershipWindow& window) {
  std::set<std::string> out;
  if (!corpus.has_community(community)) {
    log_warn("members: unknown community " + std::string(community));
    return out;
  }
  const TimeWindow w = window.at(at);
  if (w.end <= w.begin) return out;
  auto idx = corpus.community_comments(community);
  const auto& comments = corpus.comments();
  auto lo = std::lower_bound(idx.begin(), idx.end(), w.begin, [&](std::size_t i, Timestamp t) {
    return comments[i].timestamp < t;
  });
  for (auto it = lo; it != idx.end() && comments[*it].timestamp < w.end; ++it) {
    out.insert(comments[*it].author);
  }
  for (auto it = out.begin(); it != out.end();) {
    if (count_in_window(corpus.user_comment_times(*it, excluded), w) > 0) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

UserActivity user_activity(const Corpus& corpus, std::string_view user, std::string_view community,
                           TimeWindow window) {
  UserActivity a;
  a.count_in_community = count_in_window(corpus.user_comment_times(user, community), window);
  a.count_total = count_in_window(corpus.user_comment_times(user), window);
  a.fraction = a.count_total == 0 ? 0.0
                                  : static_cast<double>(a.count_in_community) /
                                        static_cast<double>(a.count_total);
  return a;
}

}  // namespace intercom
