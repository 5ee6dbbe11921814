#include "intercom/impact.hpp"

#include <algorithm>
#include <stdexcept>

#include "intercom/error.hpp"
#include "intercom/matching.hpp"
#include "intercom/random.hpp"
#include "intercom/stats.hpp"

namespace intercom {

const char* to_string(Role r) { return r == Role::Attacker ? "attacker" : "defender"; }

FractionChange fraction_change(const Corpus& corpus, std::string_view user,
                               std::string_view community, TimeWindow before, TimeWindow after) {
  const auto b = user_activity(corpus, user, community, before);
  const auto a = user_activity(corpus, user, community, after);
  FractionChange fc;
  fc.before_fraction = b.fraction;
  fc.after_fraction = a.fraction;
  fc.before_total = b.count_total;
  fc.after_total = a.count_total;
  fc.delta = a.fraction - b.fraction;
  fc.low_support = b.count_total == 0 || a.count_total == 0;
  return fc;
}

std::pair<TimeWindow, TimeWindow> impact_windows(Timestamp t0, const ImpactOptions& o) {
  const Timestamp end = t0 + std::max(o.duration, o.guard);
  return {TimeWindow{t0 - o.lookback, t0 - o.guard}, TimeWindow{end, end + o.lookback}};
}

FractionChange activity_delta(const Corpus& corpus, std::string_view user,
                              std::string_view community, Timestamp t0, const ImpactOptions& o) {
  const auto [before, after] = impact_windows(t0, o);
  return fraction_change(corpus, user, community, before, after);
}

std::vector<ImpactRecord> mobilization_impacts(const Corpus& corpus,
                                               const MobilizationRecord& m, std::uint64_t seed,
                                               const ImpactOptions& o) {
  std::vector<ImpactRecord> out;
  const CrossLink& link = m.crosslink;
  auto add = [&](const std::string& user, Role role) {
    ImpactRecord rec;
    rec.mobilization_id = m.id();
    rec.user = user;
    rec.role = role;
    const auto own = activity_delta(corpus, user, link.target_community, link.t0, o);
    rec.delta = own.delta;
    rec.low_support = own.low_support;
    UserMatchQuery q;
    q.user = user;
    q.community = role == Role::Attacker ? link.source_community : link.target_community;
    q.counterpart = role == Role::Attacker ? link.target_community : link.source_community;
    q.at = link.t0;
    q.target_thread = link.target_post;
    q.seed = derive_seed(seed, m.id() + "/" + user);
    try {
      const auto match = matched_user(corpus, q);
      rec.matched_user = match.match_id;
      rec.matched_delta = activity_delta(corpus, match.match_id, link.target_community, link.t0, o).delta;
    } catch (const NoMatch&) {
    }
    out.push_back(std::move(rec));
  };
  for (const auto& u : m.attackers) add(u, Role::Attacker);
  for (const auto& u : m.defenders) add(u, Role::Defender);
  return out;
}

DefenseOutcome defense_success(std::string_view mobilization_id,
                               std::span<const ImpactRecord> impacts, SuccessMode mode) {
  double own = 0.0;
  double matched = 0.0;
  std::size_t n = 0;
  std::size_t n_matched = 0;
  for (const auto& r : impacts) {
    if (r.role != Role::Defender) continue;
    own += r.delta;
    ++n;
    if (r.matched_delta) {
      matched += *r.matched_delta;
      ++n_matched;
    }
  }
  if (n == 0) throw std::invalid_argument("defense_success: no defender impact records");
  DefenseOutcome out;
  out.mobilization_id = std::string(mobilization_id);
  out.defenders = n;
  out.success_score = own / static_cast<double>(n);
  if (mode == SuccessMode::MatchedAdjusted && n_matched > 0) {
    out.success_score -= matched / static_cast<double>(n_matched);
  }
  return out;
}

void assign_deciles(std::vector<DefenseOutcome>& outcomes) {
  std::vector<std::size_t> order(outcomes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (outcomes[a].success_score != outcomes[b].success_score) {
      return outcomes[a].success_score < outcomes[b].success_score;
    }
    return outcomes[a].mobilization_id < outcomes[b].mobilization_id;
  });
  const std::size_t n = outcomes.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    outcomes[order[rank]].decile = static_cast<int>(rank * 10 / n) + 1;
  }
}

Series moving_average(std::vector<SeriesPoint> points, int window) {
  Series s;
  const std::size_t n = points.size();
  if (window < 0 || n < static_cast<std::size_t>(2 * window + 1)) {
    s.points = std::move(points);
    return s;
  }
  s.points = points;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(window) ? i - window : 0;
    const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(window));
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += points[j].y;
    s.points[i].y = sum / static_cast<double>(hi - lo + 1);
  }
  s.smoothed = true;
  return s;
}

Series decile_series(std::span<const DefenseOutcome> outcomes, const OutcomeMetric& metric,
                     int window) {
  std::vector<const DefenseOutcome*> sorted;
  for (const auto& o : outcomes) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](const DefenseOutcome* a, const DefenseOutcome* b) {
    if (a->success_score != b->success_score) return a->success_score < b->success_score;
    return a->mobilization_id < b->mobilization_id;
  });
  std::vector<SeriesPoint> points;
  for (const auto* o : sorted) {
    if (auto y = metric(*o)) points.push_back({o->success_score, *y});
  }
  return moving_average(std::move(points), window);
}

ExtremeComparison compare_extremes(std::span<const DefenseOutcome> outcomes,
                                   const OutcomeMetric& metric) {
  std::vector<double> top;
  std::vector<double> bottom;
  for (const auto& o : outcomes) {
    if (o.decile != 10 && o.decile != 1) continue;
    auto y = metric(o);
    if (!y) continue;
    (o.decile == 10 ? top : bottom).push_back(*y);
  }
  ExtremeComparison c;
  c.top_n = top.size();
  c.bottom_n = bottom.size();
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  c.top_mean = mean(top);
  c.bottom_mean = mean(bottom);
  if (!top.empty() && !bottom.empty()) c.p_value = stats::mann_whitney_u(top, bottom).p_value;
  return c;
}

}  // namespace intercom
