#include "adachunk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adachunk/error.hpp"

namespace adachunk {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw RuntimeError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
  return percentile(xs, 50.0);
}

double percentile(std::span<const double> xs, double p) {
  if (xs.empty()) throw RuntimeError("percentile of empty sample");
  if (p < 0.0 || p > 100.0) throw ValidationError("percentile must lie in [0, 100]");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double harmonic_mean(std::span<const double> xs) {
  if (xs.empty()) throw RuntimeError("harmonic mean of empty sample");
  double inv = 0.0;
  for (double x : xs) inv += 1.0 / x;
  return static_cast<double>(xs.size()) / inv;
}

}  // namespace adachunk
