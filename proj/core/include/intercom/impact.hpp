#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intercom/corpus.hpp"
#include "intercom/mobilization.hpp"

namespace intercom {

struct ImpactOptions {
  Timestamp lookback = 30 * kDay;
  // Events within [t0 - guard, t0 + guard) are ignored.
  Timestamp guard = 3 * kDay;
  // The mobilization is considered over at t0 + duration.
  Timestamp duration = 3 * kDay;
};

struct FractionChange {
  double before_fraction = 0.0;
  double after_fraction = 0.0;
  double delta = 0.0;  // after - before
  std::size_t before_total = 0;
  std::size_t after_total = 0;
  bool low_support = false;  // a window without comments
};

// Change in the fraction of the user's comments made in `community` between
// two windows.
FractionChange fraction_change(const Corpus& corpus, std::string_view user,
                               std::string_view community, TimeWindow before, TimeWindow after);

// Before: [t0 - lookback, t0 - guard). After: [t_end, t_end + lookback) with
// t_end = t0 + duration (and never earlier than t0 + guard).
std::pair<TimeWindow, TimeWindow> impact_windows(Timestamp t0, const ImpactOptions& options = {});

FractionChange activity_delta(const Corpus& corpus, std::string_view user,
                              std::string_view community, Timestamp t0,
                              const ImpactOptions& options = {});

enum class Role { Attacker, Defender };
const char* to_string(Role r);

struct ImpactRecord {
  std::string mobilization_id;
  std::string user;
  Role role = Role::Attacker;
  double delta = 0.0;  // change of the fraction of comments in the target community
  std::optional<double> matched_delta;
  std::string matched_user;
  bool low_support = false;
};

// One record per attacker and defender, each paired with a matched user
// drawn from the same membership pool. Users without a match keep an empty
// matched_delta.
std::vector<ImpactRecord> mobilization_impacts(const Corpus& corpus,
                                               const MobilizationRecord& mobilization,
                                               std::uint64_t seed,
                                               const ImpactOptions& options = {});

enum class SuccessMode { MatchedAdjusted, Raw };

struct DefenseOutcome {
  std::string mobilization_id;
  double success_score = 0.0;
  int decile = 0;  // 1 (least successful) .. 10; 0 until assigned
  std::size_t defenders = 0;
};

// Mean defender delta minus mean matched delta (Raw: mean defender delta).
// Throws std::invalid_argument when `impacts` holds no defender record.
DefenseOutcome defense_success(std::string_view mobilization_id,
                               std::span<const ImpactRecord> impacts,
                               SuccessMode mode = SuccessMode::MatchedAdjusted);

// Rank-based equal-size bins (sizes differ by at most one); ties by id.
void assign_deciles(std::vector<DefenseOutcome>& outcomes);

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::vector<SeriesPoint> points;
  bool smoothed = false;
};

// Centered moving average over +-window points (truncated at the ends).
// Fewer than 2*window+1 points: returned unchanged with smoothed = false.
Series moving_average(std::vector<SeriesPoint> points, int window = 5);

using OutcomeMetric = std::function<std::optional<double>(const DefenseOutcome&)>;

// Metric per outcome ordered by success score, then smoothed.
Series decile_series(std::span<const DefenseOutcome> outcomes, const OutcomeMetric& metric,
                     int window = 5);

struct ExtremeComparison {
  std::size_t top_n = 0;
  std::size_t bottom_n = 0;
  double top_mean = 0.0;
  double bottom_mean = 0.0;
  std::optional<double> p_value;  // Mann-Whitney; empty if either side is empty
};

// Top decile (10) against bottom decile (1). Deciles must be assigned.
ExtremeComparison compare_extremes(std::span<const DefenseOutcome> outcomes,
                                   const OutcomeMetric& metric);

}  // namespace intercom
