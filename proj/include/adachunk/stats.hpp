#pragma once

#include <span>
#include <vector>

namespace adachunk {

double mean(std::span<const double> xs);

// Median of a non-empty sample; even counts average the two middle values.
double median(std::span<const double> xs);

// Percentile with linear interpolation between closest ranks
// (rank = p/100 * (n-1)), p in [0, 100].
double percentile(std::span<const double> xs, double p);

double harmonic_mean(std::span<const double> xs);

}  // namespace adachunk
