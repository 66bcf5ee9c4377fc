#pragma once

#include "adachunk/media.hpp"

namespace adachunk {

// Per-second QoE weights: total = lambda * sum(v) - beta * rebuffer - gamma * sum|dv|.
struct QoeWeights {
  double lambda_per_s = 0.25;
  double beta = 100.0;
  double gamma = 1.0;

  QoeWeights scaled(double k) const { return {lambda_per_s * k, beta * k, gamma * k}; }
};

void validate(const QoeWeights& w);

}  // namespace adachunk
