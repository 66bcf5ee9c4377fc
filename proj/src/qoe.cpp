#include "adachunk/qoe.hpp"

#include <cmath>

#include "adachunk/error.hpp"

namespace adachunk {

void validate(const QoeWeights& w) {
  if (w.lambda_per_s < 0.0 || w.beta < 0.0 || w.gamma < 0.0) {
    throw ValidationError("qoe weights must be non-negative");
  }
}

QoeBreakdown qoe(const SimOutcome& outcome, const QoeWeights& w, VmafModel model) {
  QoeBreakdown b;
  for (std::size_t t = 0; t < outcome.seconds.size(); ++t) {
    const double v = outcome.seconds[t].v(model);
    if (std::isnan(v)) {
      throw ValidationError("vmaf model " + std::string(to_string(model)) + " missing in outcome");
    }
    b.quality_sum += outcome.seconds[t].played * v;
    b.duration += outcome.seconds[t].played;
    if (t > 0) b.switching_sum += std::abs(v - outcome.seconds[t - 1].v(model));
  }
  b.rebuffer_s = outcome.total_rebuffer();
  b.total = w.lambda_per_s * b.quality_sum - w.beta * b.rebuffer_s - w.gamma * b.switching_sum;
  if (b.duration > 0.0) {
    b.rebuffer_ratio = 60.0 * b.rebuffer_s / b.duration;
    b.vmaf_fluctuation_raw = b.switching_sum / b.duration;
    b.mean_vmaf = b.quality_sum / b.duration;
  }
  return b;
}

double qoe_max(double playback_duration, const QoeWeights& weights) {
  return weights.lambda_per_s * 100.0 * playback_duration;
}

double qoe_improvement(double q_candidate, double q_baseline, double q_max) {
  if (!(q_max > 0.0)) throw ValidationError("maximum QoE must be positive");
  return 100.0 * (q_candidate - q_baseline) / q_max;
}

double rebuffer_ratio(const SimOutcome& outcome) {
  if (!(outcome.video_duration > 0.0)) throw ValidationError("video duration must be positive");
  return 60.0 * outcome.total_rebuffer() / outcome.video_duration;
}

double fluctuation_normalized(double raw, double baseline_raw) {
  if (!(baseline_raw > 0.0)) throw ValidationError("baseline fluctuation must be positive");
  return raw / baseline_raw;
}

double byte_overhead(const Chunking& chunking, const VideoMeta& video) {
  double base = 0.0;
  for (const auto& f : video.fragments) {
    for (const auto& t : f.tracks) base += static_cast<double>(t.bytes);
  }
  double added = 0.0;
  for (const auto& a : chunking.augmentations) added += static_cast<double>(a.bytes);
  return 100.0 * added / base;
}

VmafModel evaluation_model(Bucket b) {
  switch (b) {
    case Bucket::slow: return VmafModel::mobile;
    case Bucket::medium: return VmafModel::hdtv;
    case Bucket::fast: return VmafModel::uhd4k;
  }
  return VmafModel::uhd4k;
}

}  // namespace adachunk
