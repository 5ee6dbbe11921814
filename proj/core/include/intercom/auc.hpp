#pragma once

#include <span>

namespace intercom {

// Probability that a random positive scores above a random negative, ties
// counting one half (Mann-Whitney rank statistic). Labels are 0/1.
// Throws std::invalid_argument unless both labels are present.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace intercom
