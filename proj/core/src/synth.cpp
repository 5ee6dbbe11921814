#include "intercom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "intercom/error.hpp"
#include "intercom/random.hpp"
#include "json.hpp"

namespace intercom {

namespace {

constexpr Timestamp kWarmup = 31 * kDay;
constexpr Timestamp kTail = 35 * kDay;
constexpr Timestamp kThreadLife = 8 * kHour;  // background comments land within this
constexpr Timestamp kTargetOffset = 20 * kHour;
constexpr Timestamp kCompanionOffset = 20 * kHour + 30 * 60;
constexpr Timestamp kSourceOffset = 33 * kHour;
// Background posts never start in this part of the day, so the companion
// post stays the nearest link-free post to each target.
constexpr Timestamp kQuietBegin = 16 * kHour;
constexpr Timestamp kMatchedBefore = 4;

const std::vector<std::string> kCommon = {"the", "and", "a", "of", "to", "is", "this", "that",
                                          "with", "for", "it", "on", "we", "you", "was", "about"};

std::string pad(long n, int width) {
  std::string s = std::to_string(n);
  return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

std::string invent_word(Rng& rng) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::string w;
  const std::size_t syllables = 2 + rng.index(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += onsets[rng.index(std::size(onsets))];
    w += vowels[rng.index(std::size(vowels))];
  }
  return w;
}

class Generator {
 public:
  explicit Generator(const SynthSpec& spec) : spec_(spec), rng_(derive_seed(spec.seed, "synth")) {}

  SynthCorpus run();

 private:
  struct Community {
    std::string name;
    std::vector<std::string> regulars;
    std::vector<std::string> vocab;
    std::vector<std::size_t> plain_posts;  // indices into events_, time-ordered
    int mobile_used = 0;
  };

  std::string text(const Community& c, std::size_t words);
  std::string add_post(Community& c, const std::string& author, Timestamp t, std::string body);
  std::string add_comment(const std::string& thread, const std::string& parent, const Community& c,
                          const std::string& author, Timestamp t, std::string body);
  void background_comments(Community& c, const std::string& post, Timestamp t, std::size_t n);
  std::string mobile_user(Community& c, Timestamp t0);
  Timestamp uniform_time(Timestamp begin, Timestamp end) {
    return begin + static_cast<Timestamp>(rng_.index(static_cast<std::size_t>(end - begin)));
  }

  SynthSpec spec_;
  Rng rng_;
  std::vector<Community> comms_;
  std::vector<Event> events_;
  long posts_ = 0;
  long comments_ = 0;
};

std::string Generator::text(const Community& c, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    const auto& w = rng_.bernoulli(0.4) ? kCommon[rng_.index(kCommon.size())]
                                        : c.vocab[rng_.index(c.vocab.size())];
    out += (out.empty() ? "" : " ") + w;
  }
  return out;
}

std::string Generator::add_post(Community& c, const std::string& author, Timestamp t, std::string body) {
  Event e;
  e.kind = EventKind::Post;
  e.id = "p" + pad(++posts_, 6);
  e.author = author;
  e.community = c.name;
  e.timestamp = t;
  e.body = std::move(body);
  events_.push_back(std::move(e));
  return events_.back().id;
}

std::string Generator::add_comment(const std::string& thread, const std::string& parent,
                                   const Community& c, const std::string& author, Timestamp t,
                                   std::string body) {
  Event e;
  e.kind = EventKind::Comment;
  e.id = "c" + pad(++comments_, 7);
  e.author = author;
  e.community = c.name;
  e.timestamp = t;
  e.thread_id = thread;
  e.parent_id = parent;
  e.body = std::move(body);
  events_.push_back(std::move(e));
  return events_.back().id;
}

void Generator::background_comments(Community& c, const std::string& post, Timestamp t, std::size_t n) {
  std::vector<Timestamp> times;
  for (std::size_t i = 0; i < n; ++i) times.push_back(uniform_time(t + 60, t + kThreadLife));
  std::sort(times.begin(), times.end());
  std::vector<std::string> ids{post};
  for (Timestamp ct : times) {
    const std::string& parent = ids[rng_.index(ids.size())];
    ids.push_back(add_comment(post, parent, c, c.regulars[rng_.index(c.regulars.size())], ct,
                              text(c, 4 + rng_.index(8))));
  }
}

// A fresh mobile user of `c` with one history comment in c during
// [t0 - 29d, t0 - 4d + 8h], inside the membership history window of t0.
std::string Generator::mobile_user(Community& c, Timestamp t0) {
  if (c.mobile_used >= spec_.mobile_per_community) {
    throw Error("synth: infeasible spec: community " + c.name + " needs more than " +
                std::to_string(spec_.mobile_per_community) + " mobile users");
  }
  const std::string user = c.name + "_m" + pad(c.mobile_used++, 4);
  const auto lo = std::lower_bound(c.plain_posts.begin(), c.plain_posts.end(), t0 - 29 * kDay,
                                   [&](std::size_t i, Timestamp t) { return events_[i].timestamp < t; });
  const auto hi = std::upper_bound(c.plain_posts.begin(), c.plain_posts.end(), t0 - 4 * kDay,
                                   [&](Timestamp t, std::size_t i) { return t < events_[i].timestamp; });
  if (lo >= hi) throw Error("synth: infeasible spec: no background post in the history window of " + c.name);
  const Event& post = events_[lo[static_cast<long>(rng_.index(static_cast<std::size_t>(hi - lo)))]];
  const std::string thread = post.id;
  const Timestamp t = uniform_time(post.timestamp + 60, post.timestamp + kThreadLife);
  add_comment(thread, thread, c, user, t, text(c, 5));
  return user;
}

SynthCorpus Generator::run() {
  const auto& s = spec_;
  if (s.communities < 2 && s.crosslinks > 0) throw std::invalid_argument("synth: cross-links need at least 2 communities");
  if (s.communities < 1 || s.regulars_per_community < 1 || s.mobile_per_community < 0 ||
      s.crosslinks < 0 || s.comments_per_post < 0 || s.max_defenders < 0) {
    throw std::invalid_argument("synth: counts must be non-negative (at least one community and regular)");
  }
  if (!(s.posts_per_day > 0) || s.posts_per_day > 48) throw std::invalid_argument("synth: posts_per_day must be in (0, 48]");
  if (!(s.burst_ratio > 0) || !(s.quiet_ratio > 0) || !(s.matched_ratio >= 0.2)) {
    throw std::invalid_argument("synth: ratios must be positive (matched_ratio >= 0.2)");
  }
  for (double f : {s.mobilized_fraction, s.negative_fraction}) {
    if (!(f >= 0 && f <= 1)) throw std::invalid_argument("synth: fractions must be in [0, 1]");
  }

  Rng vocab_rng(derive_seed(s.seed, "synth/vocab"));
  for (int i = 0; i < s.communities; ++i) {
    Community c;
    c.name = "comm" + pad(i, 2);
    for (int u = 0; u < s.regulars_per_community; ++u) c.regulars.push_back(c.name + "_r" + pad(u, 3));
    for (int w = 0; w < 40; ++w) c.vocab.push_back(invent_word(vocab_rng));
    comms_.push_back(std::move(c));
  }

  const Timestamp first_slot = s.start + kWarmup;
  const Timestamp end = first_slot + static_cast<Timestamp>(s.crosslinks) * kDay + kTail;

  // Background posts and comments.
  const auto spacing = static_cast<Timestamp>(static_cast<double>(kDay) / s.posts_per_day);
  for (auto& c : comms_) {
    const Timestamp offset = (static_cast<Timestamp>(&c - comms_.data()) * 37 * 60) % std::max<Timestamp>(spacing, 1);
    for (Timestamp t = s.start + offset; t < end; t += std::max<Timestamp>(spacing, 1)) {
      if ((t - s.start) % kDay >= kQuietBegin) continue;
      const std::string author = c.regulars[rng_.index(c.regulars.size())];
      const std::string id = add_post(c, author, t, text(c, 6 + rng_.index(10)));
      c.plain_posts.push_back(events_.size() - 1);
      background_comments(c, id, t, rng_.index(2 * static_cast<std::size_t>(s.comments_per_post) + 1));
    }
  }

  // Which links burst and which are hostile.
  const auto flags = [&](double fraction, const char* stream) {
    std::vector<bool> v(static_cast<std::size_t>(s.crosslinks), false);
    const auto k = static_cast<std::size_t>(std::llround(fraction * s.crosslinks));
    std::fill(v.begin(), v.begin() + static_cast<long>(k), true);
    Rng r(derive_seed(s.seed, stream));
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = r.index(i);
      const bool tmp = v[i - 1];
      v[i - 1] = v[j];
      v[j] = tmp;
    }
    return v;
  };
  const auto mobilized = flags(s.mobilized_fraction, "synth/mobilized");
  const auto negative = flags(s.negative_fraction, "synth/negative");

  const auto matched_after =
      static_cast<std::size_t>(std::max(0L, std::lround(s.matched_ratio * (kMatchedBefore + 1) - 1)));
  SynthManifest manifest;
  manifest.seed = s.seed;
  manifest.matched_ratio = static_cast<double>(matched_after + 1) / static_cast<double>(kMatchedBefore + 1);

  const auto& hostile = synth_hostile_words();
  const auto& friendly = synth_friendly_words();
  for (int i = 0; i < s.crosslinks; ++i) {
    const Timestamp slot = first_slot + static_cast<Timestamp>(i) * kDay;
    const auto si = rng_.index(comms_.size());
    const auto ti = (si + 1 + rng_.index(comms_.size() - 1)) % comms_.size();
    Community& src = comms_[si];
    Community& tgt = comms_[ti];

    PlantedLink link;
    link.source_community = src.name;
    link.target_community = tgt.name;
    link.t0 = slot + kSourceOffset;
    link.mobilized = mobilized[static_cast<std::size_t>(i)];
    link.negative = negative[static_cast<std::size_t>(i)];
    if (link.mobilized) {
      link.before = rng_.index(3);
      link.after = static_cast<std::size_t>(
          std::ceil(s.burst_ratio * static_cast<double>(link.before + 1) - 1.0 - 1e-9));
    } else {
      link.before = static_cast<std::size_t>(std::max(3.0, std::ceil(1.0 / s.quiet_ratio) - 1.0));
      link.after = static_cast<std::size_t>(std::max(
          0.0, std::floor(s.quiet_ratio * static_cast<double>(link.before + 1) - 1.0 + 1e-9)));
    }
    link.ratio = static_cast<double>(link.after + 1) / static_cast<double>(link.before + 1);

    const std::size_t shared = rng_.index(2 * static_cast<std::size_t>(s.comments_per_post) + 1);
    const Timestamp target_time = slot + kTargetOffset;
    link.target_post = add_post(tgt, tgt.regulars[rng_.index(tgt.regulars.size())], target_time,
                                text(tgt, 8 + rng_.index(8)));
    background_comments(tgt, link.target_post, target_time, shared);
    const Timestamp matched_time = slot + kCompanionOffset;
    link.matched_post = add_post(tgt, tgt.regulars[rng_.index(tgt.regulars.size())], matched_time,
                                 text(tgt, 8 + rng_.index(8)));
    background_comments(tgt, link.matched_post, matched_time, shared);

    // Source post.
    std::string body;
    const auto& tone = link.negative ? hostile : friendly;
    for (int k = 0; k < 3; ++k) body += tone[rng_.index(tone.size())] + " ";
    body += text(src, 4) + " https://www.reddit.com/r/" + tgt.name + "/comments/" + link.target_post + " ";
    for (int k = 0; k < 2; ++k) body += tone[rng_.index(tone.size())] + " ";
    body += text(src, 3);
    link.source_post = add_post(src, src.regulars[rng_.index(src.regulars.size())], link.t0, body);

    // Source members on the target thread before t0.
    for (std::size_t k = 0; k < link.before; ++k) {
      const std::string u = mobile_user(src, link.t0);
      add_comment(link.target_post, link.target_post, tgt, u, uniform_time(link.t0 - 12 * kHour, link.t0),
                  text(src, 5));
    }

    // Attackers and defenders after t0, replying mostly within their own group.
    struct Planned {
      Timestamp t;
      std::string user;
      bool attacker;
    };
    std::vector<Planned> plan;
    for (std::size_t k = 0; k < link.after; ++k) {
      const std::string u = mobile_user(src, link.t0);
      link.attackers.insert(u);
      plan.push_back({uniform_time(link.t0, link.t0 + 12 * kHour), u, true});
    }
    const std::size_t defenders = s.max_defenders > 0 ? 1 + rng_.index(static_cast<std::size_t>(s.max_defenders)) : 0;
    for (std::size_t k = 0; k < defenders; ++k) {
      const std::string u = mobile_user(tgt, link.t0);
      link.defenders.insert(u);
      plan.push_back({uniform_time(link.t0, link.t0 + 12 * kHour), u, false});
    }
    std::sort(plan.begin(), plan.end(), [](const Planned& a, const Planned& b) {
      return a.t != b.t ? a.t < b.t : a.user < b.user;
    });
    std::vector<std::pair<std::string, bool>> written;
    for (const auto& p : plan) {
      std::vector<const std::string*> same;
      std::vector<const std::string*> other;
      for (const auto& [id, attacker] : written) (attacker == p.attacker ? same : other).push_back(&id);
      std::string parent = link.target_post;
      const double roll = rng_.uniform();
      if (!same.empty() && roll < 0.6) parent = *same[rng_.index(same.size())];
      else if (!other.empty() && roll < 0.8) parent = *other[rng_.index(other.size())];
      std::string body_text = text(p.attacker ? src : tgt, 6);
      if (p.attacker && link.negative) body_text += " " + hostile[rng_.index(hostile.size())];
      written.emplace_back(add_comment(link.target_post, parent, tgt, p.user, p.t, body_text), p.attacker);
    }

    // Source members on the matched thread.
    for (std::size_t k = 0; k < kMatchedBefore + matched_after; ++k) {
      const std::string u = mobile_user(src, link.t0);
      const Timestamp t = k < kMatchedBefore ? uniform_time(link.t0 - 12 * kHour, link.t0)
                                             : uniform_time(link.t0, link.t0 + 12 * kHour);
      add_comment(link.matched_post, link.matched_post, tgt, u, t, text(src, 5));
    }
    manifest.links.push_back(std::move(link));
  }

  std::sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
  });
  return {std::move(events_), std::move(manifest)};
}

}  // namespace

std::size_t SynthManifest::mobilization_count() const {
  return static_cast<std::size_t>(
      std::count_if(links.begin(), links.end(), [](const PlantedLink& l) { return l.mobilized; }));
}

SynthCorpus generate_corpus(const SynthSpec& spec) { return Generator(spec).run(); }

void write_events(const std::vector<Event>& events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Event& e : events) out << serialize_event(e) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::string manifest_json(const SynthManifest& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["matched_ratio"] = m.matched_ratio;
  j["mobilizations"] = m.mobilization_count();
  j["links"] = nlohmann::ordered_json::array();
  for (const auto& l : m.links) {
    nlohmann::ordered_json o;
    o["source_post"] = l.source_post;
    o["target_post"] = l.target_post;
    o["matched_post"] = l.matched_post;
    o["source_community"] = l.source_community;
    o["target_community"] = l.target_community;
    o["t0"] = l.t0;
    o["before"] = l.before;
    o["after"] = l.after;
    o["ratio"] = l.ratio;
    o["mobilized"] = l.mobilized;
    o["sentiment"] = l.negative ? "negative" : "neutral";
    o["attackers"] = l.attackers;
    o["defenders"] = l.defenders;
    j["links"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

void write_sentiment_labels(const SynthManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : m.links) out << l.source_post << '\t' << (l.negative ? "negative" : "neutral") << '\n';
}

const std::vector<std::string>& synth_hostile_words() {
  static const std::vector<std::string> words = {"hate", "stupid", "idiots", "angry", "furious",
                                                 "awful", "disgusting", "pathetic", "trash", "morons"};
  return words;
}

const std::vector<std::string>& synth_friendly_words() {
  static const std::vector<std::string> words = {"thanks", "great", "interesting", "nice", "helpful",
                                                 "love", "cool", "good", "enjoy", "wonderful"};
  return words;
}

}  // namespace intercom
