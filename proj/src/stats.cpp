#include "tattooed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tattooed {
namespace {

double ks_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<double> sorted_copy(std::span<const float> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

void moments(std::span<const float> v, double& mean, double& sd) {
  double s = 0.0;
  for (float x : v) s += x;
  mean = s / static_cast<double>(v.size());
  double q = 0.0;
  for (float x : v) q += (x - mean) * (x - mean);
  sd = std::sqrt(q / static_cast<double>(v.size()));
}

}  // namespace

double ks_statistic(std::span<const float> a, std::span<const float> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS needs two non-empty samples");
  return ks_sorted(sorted_copy(a), sorted_copy(b));
}

DistributionComparison compare_distributions(std::span<const float> a, std::span<const float> b,
                                             std::size_t bins) {
  if (a.empty() || b.empty()) throw std::invalid_argument("comparison needs two non-empty samples");
  if (bins == 0) throw std::invalid_argument("bins must be positive");
  DistributionComparison c;
  c.bins = bins;
  moments(a, c.mean_a, c.std_a);
  moments(b, c.mean_b, c.std_b);

  auto sa = sorted_copy(a);
  auto sb = sorted_copy(b);
  c.ks = ks_sorted(sa, sb);

  auto standardize = [](std::vector<double>& s, double mean, double sd) {
    for (auto& x : s) x = sd > 0.0 ? (x - mean) / sd : 0.0;
  };
  std::vector<double> za = sa, zb = sb;
  standardize(za, c.mean_a, c.std_a);
  standardize(zb, c.mean_b, c.std_b);
  c.ks_standardized = ks_sorted(za, zb);

  const double lo = std::min(sa.front(), sb.front());
  const double hi = std::max(sa.back(), sb.back());
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<double> ha(bins, 0.0), hb(bins, 0.0);
  auto bin_of = [&](double x) {
    return std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
  };
  for (double x : sa) ha[bin_of(x)] += 1.0 / static_cast<double>(sa.size());
  for (double x : sb) hb[bin_of(x)] += 1.0 / static_cast<double>(sb.size());
  for (std::size_t i = 0; i < bins; ++i) c.total_variation += std::fabs(ha[i] - hb[i]);
  c.total_variation *= 0.5;
  return c;
}

}  // namespace tattooed
