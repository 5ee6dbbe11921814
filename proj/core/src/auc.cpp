#include "intercom/auc.hpp"

#include <stdexcept>

#include "intercom/stats.hpp"

namespace intercom {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  const auto ranks = stats::midranks(scores);
  double pos = 0.0;
  double neg = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos += 1.0;
      rank_sum += ranks[i];
    } else if (labels[i] == 0) {
      neg += 1.0;
    } else {
      throw std::invalid_argument("auc: labels must be 0 or 1");
    }
  }
  if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("auc: both labels must be present");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

}  // namespace intercom
