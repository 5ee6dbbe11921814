#pragma once

#include <span>
#include <utility>
#include <vector>

namespace intercom::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

// Upper tail of the standard normal.
double normal_sf(double z);

struct MannWhitneyOptions {
  // Exact permutation distribution when both samples are at most this size.
  std::size_t exact_max_n = 20;
};

// U statistic of `a` (midranks for ties). Exact p by enumerating the rank-sum
// distribution (ties included) for small samples, otherwise the normal
// approximation with tie and continuity corrections.
// Throws std::invalid_argument for an empty sample.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          const MannWhitneyOptions& options = {});

struct WilcoxonOptions {
  std::size_t exact_max_n = 25;  // non-zero differences
};

// W = sum of ranks of positive differences after dropping zeros.
// Throws std::invalid_argument when every difference is zero.
TestResult wilcoxon_signed_rank(std::span<const double> differences,
                                const WilcoxonOptions& options = {});
TestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                const WilcoxonOptions& options = {});

// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace intercom::stats
