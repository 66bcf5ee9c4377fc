#pragma once

#include <string>
#include <vector>

#include "adachunk/media.hpp"
#include "adachunk/qoe_weights.hpp"
#include "adachunk/simulator.hpp"

namespace adachunk {

struct QoeBreakdown {
  double quality_sum = 0.0;
  double rebuffer_s = 0.0;  // startup delay included
  double switching_sum = 0.0;
  double total = 0.0;
  double rebuffer_ratio = 0.0;        // seconds per minute of video
  double vmaf_fluctuation_raw = 0.0;  // mean |dv| per second of playback
  double mean_vmaf = 0.0;
  double duration = 0.0;
};

QoeBreakdown qoe(const SimOutcome& outcome, const QoeWeights& weights, VmafModel model);

// Best achievable total for a video: VMAF 100 throughout, no impairments.
double qoe_max(double playback_duration, const QoeWeights& weights);

double qoe_improvement(double q_candidate, double q_baseline, double q_max);

double rebuffer_ratio(const SimOutcome& outcome);

double fluctuation_normalized(double raw, double baseline_raw);

// Percent of base-ladder bytes added by the chunking's augmentations.
double byte_overhead(const Chunking& chunking, const VideoMeta& video);

// Default evaluation model per bucket: SLOW on mobile, MEDIUM on HDTV, FAST on 4K.
VmafModel evaluation_model(Bucket b);

}  // namespace adachunk
