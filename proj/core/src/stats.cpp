#include "intercom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace intercom::stats {

namespace {

// Sum over tie groups of (t^3 - t).
double tie_term(std::span<const double> values) {
  std::map<double, double> counts;
  for (double v : values) counts[v] += 1.0;
  double s = 0.0;
  for (const auto& [_, t] : counts) s += t * t * t - t;
  return s;
}

// Two-sided p from a discrete null distribution over doubled statistics.
double two_sided_from_counts(const std::vector<double>& counts, long observed2) {
  double total = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    total += counts[s];
    if (static_cast<long>(s) <= observed2) lower += counts[s];
    if (static_cast<long>(s) >= observed2) upper += counts[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          const MannWhitneyOptions& options) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(nb);
  TestResult res;
  res.statistic = rank_sum_a - dna * (dna + 1.0) / 2.0;

  if (na <= options.exact_max_n && nb <= options.exact_max_n) {
    // Midranks are multiples of 1/2, so doubled rank sums are integers.
    std::vector<long> r2(n);
    long max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = std::lround(2.0 * ranks[i]);
      max_sum += r2[i];
    }
    // ways[k][s]: subsets of size k with doubled rank sum s.
    std::vector<std::vector<double>> ways(na + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = std::min(i + 1, na); k >= 1; --k) {
        for (long s = max_sum; s >= r2[i]; --s) ways[k][s] += ways[k - 1][s - r2[i]];
      }
    }
    res.p_value = two_sided_from_counts(ways[na], std::lround(2.0 * rank_sum_a));
    res.exact = true;
    return res;
  }

  const double dn = static_cast<double>(n);
  const double mu = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term(pooled) / (dn * (dn - 1.0)));
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

TestResult wilcoxon_signed_rank(std::span<const double> differences,
                                const WilcoxonOptions& options) {
  std::vector<double> nonzero;
  for (double d : differences) {
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw std::invalid_argument("wilcoxon_signed_rank: all differences are zero");
  const std::size_t n = nonzero.size();
  std::vector<double> magnitude(n);
  for (std::size_t i = 0; i < n; ++i) magnitude[i] = std::abs(nonzero[i]);
  const auto ranks = midranks(magnitude);

  TestResult res;
  for (std::size_t i = 0; i < n; ++i) {
    if (nonzero[i] > 0.0) res.statistic += ranks[i];
  }

  if (n <= options.exact_max_n) {
    long max_sum = 0;
    std::vector<long> r2(n);
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = std::lround(2.0 * ranks[i]);
      max_sum += r2[i];
    }
    std::vector<double> ways(max_sum + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long s = max_sum; s >= r2[i]; --s) ways[s] += ways[s - r2[i]];
    }
    res.p_value = two_sided_from_counts(ways, std::lround(2.0 * res.statistic));
    res.exact = true;
    return res;
  }

  const double dn = static_cast<double>(n);
  const double mu = dn * (dn + 1.0) / 4.0;
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term(magnitude) / 48.0;
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

TestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                const WilcoxonOptions& options) {
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [x, y] : pairs) diffs.push_back(x - y);
  return wilcoxon_signed_rank(std::span<const double>(diffs), options);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace intercom::stats
