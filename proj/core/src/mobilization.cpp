#include "intercom/mobilization.hpp"

#include <algorithm>
#include <stdexcept>

#include "intercom/error.hpp"
#include "intercom/text.hpp"
#include "json.hpp"

namespace intercom {

const char* to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
    case Sentiment::Unlabeled: break;
  }
  return "unlabeled";
}

const char* to_string(Verdict v) { return v == Verdict::Mobilization ? "mobilization" : "none"; }

WindowCounts window_counts(const Corpus& corpus, std::string_view thread, Timestamp t0,
                           const std::set<std::string>& authors, Timestamp half_window) {
  WindowCounts c;
  for (std::size_t i : corpus.thread_comments(thread)) {
    const Event& e = corpus.comments()[i];
    if (e.timestamp < t0 - half_window || e.timestamp >= t0 + half_window) continue;
    if (!authors.count(e.author)) continue;
    if (e.timestamp < t0) {
      ++c.before;
    } else {
      ++c.after;
    }
  }
  return c;
}

WindowCounts window_counts(const Corpus& corpus, const CrossLink& link,
                           const DetectorOptions& options) {
  const auto source_members = members(corpus, link.source_community, link.t0,
                                      link.target_community, options.membership);
  return window_counts(corpus, link.target_post, link.t0, source_members, options.half_window);
}

namespace {

std::size_t comments_before(const Corpus& corpus, std::string_view thread, Timestamp t0) {
  std::size_t n = 0;
  for (std::size_t i : corpus.thread_comments(thread)) {
    if (corpus.comments()[i].timestamp < t0) ++n;
  }
  return n;
}

}  // namespace

BaselineResult baseline_ratio(const Corpus& corpus, const CrosslinkResult& crosslinks,
                              const BaselineOptions& options) {
  BaselineResult result;
  std::vector<double> ratios;
  for (const CrossLink& link : crosslinks.links) {
    BaselinePair pair;
    pair.source_post = link.source_post;
    pair.target_post = link.target_post;
    pair.target_precount = comments_before(corpus, link.target_post, link.t0);
    try {
      pair.matched_post = matched_post(corpus, crosslinks.involved_posts, link.target_post).match_id;
    } catch (const NoMatch&) {
      result.pairs.push_back(std::move(pair));
      continue;
    }
    pair.matched_precount = comments_before(corpus, pair.matched_post, link.t0);
    const std::size_t diff = pair.target_precount > pair.matched_precount
                                 ? pair.target_precount - pair.matched_precount
                                 : pair.matched_precount - pair.target_precount;
    const auto source_members = members(corpus, link.source_community, link.t0,
                                        link.target_community, options.detector.membership);
    pair.matched_counts = window_counts(corpus, pair.matched_post, link.t0, source_members,
                                        options.detector.half_window);
    pair.eligible = diff < options.max_precount_difference;
    if (pair.eligible) ratios.push_back(smoothed_ratio(pair.matched_counts, options.detector.smoothing));
    result.pairs.push_back(std::move(pair));
  }
  result.eligible_pairs = ratios.size();
  if (ratios.empty()) {
    throw DataError(
        "baseline_ratio: no cross-link has an eligible matched thread; "
        "pass a fixed baseline (the reference value is 1.6)");
  }
  if (options.statistic == BaselineStatistic::Mean) {
    double sum = 0.0;
    for (double r : ratios) sum += r;
    result.baseline = sum / static_cast<double>(ratios.size());
  } else {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    result.baseline = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  return result;
}

MobilizationRecord detect(const Corpus& corpus, const CrossLink& link, double baseline,
                          const DetectorOptions& options) {
  if (!(baseline > 0.0)) throw std::invalid_argument("detect: baseline must be positive");
  MobilizationRecord rec;
  rec.crosslink = link;
  rec.baseline = baseline;

  const auto source_members = members(corpus, link.source_community, link.t0,
                                      link.target_community, options.membership);
  const auto target_members = members(corpus, link.target_community, link.t0,
                                      link.source_community, options.membership);
  const auto counts =
      window_counts(corpus, link.target_post, link.t0, source_members, options.half_window);
  rec.before_count = counts.before;
  rec.after_count = counts.after;
  rec.ratio = smoothed_ratio(counts, options.smoothing);
  rec.verdict = rec.ratio > baseline ? Verdict::Mobilization : Verdict::None;

  const TimeWindow after{link.t0, link.t0 + options.half_window};
  for (std::size_t i : corpus.thread_comments(link.target_post)) {
    const Event& e = corpus.comments()[i];
    if (!after.contains(e.timestamp)) continue;
    if (source_members.count(e.author)) {
      rec.attackers.insert(e.author);
    } else if (target_members.count(e.author)) {
      rec.defenders.insert(e.author);
    }
  }
  return rec;
}

std::string to_json_line(const MobilizationRecord& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["id"] = r.id();
  j["source_post"] = r.crosslink.source_post;
  j["target_post"] = r.crosslink.target_post;
  j["source_community"] = r.crosslink.source_community;
  j["target_community"] = r.crosslink.target_community;
  j["t0"] = r.crosslink.t0;
  j["author"] = r.crosslink.author;
  j["before_count"] = r.before_count;
  j["after_count"] = r.after_count;
  j["matched_post"] = r.matched_post.empty() ? ordered_json(nullptr) : ordered_json(r.matched_post);
  j["matched_before"] = r.matched_before ? ordered_json(*r.matched_before) : ordered_json(nullptr);
  j["matched_after"] = r.matched_after ? ordered_json(*r.matched_after) : ordered_json(nullptr);
  j["ratio"] = r.ratio;
  j["baseline"] = r.baseline;
  j["verdict"] = to_string(r.verdict);
  j["sentiment"] = to_string(r.sentiment);
  j["attackers"] = std::vector<std::string>(r.attackers.begin(), r.attackers.end());
  j["defenders"] = std::vector<std::string>(r.defenders.begin(), r.defenders.end());
  return j.dump();
}

}  // namespace intercom
