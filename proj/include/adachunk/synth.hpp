#pragma once

#include <cstdint>
#include <vector>

#include "adachunk/media.hpp"

namespace adachunk {

// Complexity in [0, 1] holding from `t` seconds until the next point.
struct ComplexityPoint {
  double t = 0.0;
  double complexity = 0.5;
};

struct SynthProfile {
  std::string video_id = "synthetic";
  double fps = 24.0;
  double duration = 60.0;
  // Keyframe interval drawn uniformly from [min, max] and snapped to frames.
  double keyframe_min = 1.0;
  double keyframe_max = 1.0;
  std::vector<ComplexityPoint> complexity;  // empty means constant 0.5
  double bitrate_noise = 0.05;              // relative, shared across tracks per fragment
  double vmaf_noise = 0.5;                  // points, shared across tracks per second
};

double complexity_at(const SynthProfile& profile, double t);

// Four-rung ladder used by most fixtures.
std::vector<Track> small_ladder();
// Six-rung 240p..1440p ladder.
std::vector<Track> full_ladder();

// Deterministic for a fixed (profile, ladder, seed).
VideoMeta synth_video(const SynthProfile& profile, const std::vector<Track>& ladder,
                      std::uint64_t seed);

}  // namespace adachunk
