#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "intercom/corpus.hpp"
#include "intercom/matching.hpp"

namespace intercom {

enum class Sentiment { Unlabeled, Neutral, Negative };
enum class Verdict { None, Mobilization };

const char* to_string(Sentiment s);
const char* to_string(Verdict v);

struct DetectorOptions {
  Timestamp half_window = 12 * kHour;
  MembershipWindow membership = kHistoryWindow;
  double smoothing = 1.0;  // pseudo-count added to both window counts
};

struct WindowCounts {
  std::size_t before = 0;  // [t0 - half_window, t0)
  std::size_t after = 0;   // [t0, t0 + half_window)
};

// Counts comments on `thread` authored by `authors` on each side of t0.
WindowCounts window_counts(const Corpus& corpus, std::string_view thread, Timestamp t0,
                           const std::set<std::string>& authors, Timestamp half_window);

// Source-member comment counts on the link's target thread.
WindowCounts window_counts(const Corpus& corpus, const CrossLink& link,
                           const DetectorOptions& options = {});

// (after + s) / (before + s); every cross-link stays classifiable.
inline double smoothed_ratio(WindowCounts c, double s = 1.0) {
  return (static_cast<double>(c.after) + s) / (static_cast<double>(c.before) + s);
}

enum class BaselineStatistic { Mean, Median };

struct BaselineOptions {
  BaselineStatistic statistic = BaselineStatistic::Mean;
  // Pairs are eligible when |target pre-count - matched pre-count| < this.
  std::size_t max_precount_difference = 5;
  DetectorOptions detector;
};

struct BaselinePair {
  std::string source_post;
  std::string target_post;
  std::string matched_post;  // empty when no match exists
  std::size_t target_precount = 0;
  std::size_t matched_precount = 0;
  WindowCounts matched_counts;
  bool eligible = false;
};

struct BaselineResult {
  double baseline = 0.0;
  std::size_t eligible_pairs = 0;
  std::vector<BaselinePair> pairs;  // one per cross-link, same order
};

inline constexpr double kPaperBaseline = 1.6;

// Mean (or median) smoothed after/before ratio of source-member comments on
// matched threads. Throws DataError when no pair is eligible.
BaselineResult baseline_ratio(const Corpus& corpus, const CrosslinkResult& crosslinks,
                              const BaselineOptions& options = {});

struct MobilizationRecord {
  CrossLink crosslink;
  std::size_t before_count = 0;
  std::size_t after_count = 0;
  std::optional<std::size_t> matched_before;
  std::optional<std::size_t> matched_after;
  std::string matched_post;
  double ratio = 0.0;
  double baseline = 0.0;
  Verdict verdict = Verdict::None;
  std::set<std::string> attackers;
  std::set<std::string> defenders;
  Sentiment sentiment = Sentiment::Unlabeled;

  const std::string& id() const { return crosslink.source_post; }
  bool is_mobilization() const { return verdict == Verdict::Mobilization; }
  bool is_negative() const { return is_mobilization() && sentiment == Sentiment::Negative; }
};

// Throws std::invalid_argument when baseline <= 0.
MobilizationRecord detect(const Corpus& corpus, const CrossLink& link, double baseline,
                          const DetectorOptions& options = {});

std::string to_json_line(const MobilizationRecord& record);

}  // namespace intercom
