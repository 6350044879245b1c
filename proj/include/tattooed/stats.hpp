#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tattooed {

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const float> a, std::span<const float> b);

struct DistributionComparison {
  double ks = 0.0;
  double ks_standardized = 0.0;  // KS after z-scoring each sample on its own
  double total_variation = 0.0;  // over shared equal-width bins
  double mean_a = 0.0, std_a = 0.0;
  double mean_b = 0.0, std_b = 0.0;
  std::size_t bins = 0;
};

DistributionComparison compare_distributions(std::span<const float> a, std::span<const float> b,
                                             std::size_t bins = 100);

}  // namespace tattooed
