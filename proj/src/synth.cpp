#include "adachunk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "adachunk/error.hpp"

namespace adachunk {

namespace {

constexpr double kMaxBitrateFactor = 1.75;

// Uniform double in [0, 1) from raw engine output; std distributions are not
// portable across standard libraries.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double symmetric(std::mt19937_64& rng) { return 2.0 * unit(rng) - 1.0; }

// Relative instantaneous bitrate of a fragment with the given complexity:
// 0.4x the track average for static content, 1.6x for the most complex.
double bitrate_factor(double c) { return 0.4 + 1.2 * c; }

// Fixture quality model, not a measured relationship:
//   vmaf = clamp(100 * (1 - (0.3 + 0.7 c) * exp(-beta_model * kbps / 1000)), 5, 100)
// Lower complexity and higher bitrate both raise quality; the mobile model is
// the most permissive and uhd4k the strictest.
double model_vmaf(VmafModel m, double kbps, double c) {
  static constexpr double beta[3] = {0.9, 0.5, 0.3};
  const double v =
      100.0 * (1.0 - (0.3 + 0.7 * c) * std::exp(-beta[static_cast<int>(m)] * kbps / 1000.0));
  return std::clamp(v, 5.0, 100.0);
}

}  // namespace

double complexity_at(const SynthProfile& profile, double t) {
  double c = 0.5;
  for (const auto& p : profile.complexity) {
    if (p.t <= t) c = p.complexity;
  }
  return std::clamp(c, 0.0, 1.0);
}

std::vector<Track> small_ladder() {
  return {{0, 300.0, "240p"}, {1, 750.0, "360p"}, {2, 1200.0, "480p"}, {3, 2400.0, "720p"}};
}

std::vector<Track> full_ladder() {
  return {{0, 300.0, "240p"},  {1, 750.0, "360p"},  {2, 1200.0, "480p"},
          {3, 2400.0, "720p"}, {4, 4800.0, "1080p"}, {5, 8000.0, "1440p"}};
}

VideoMeta synth_video(const SynthProfile& profile, const std::vector<Track>& ladder,
                      std::uint64_t seed) {
  if (ladder.empty()) throw ValidationError("synthetic video needs a non-empty ladder");
  if (!(profile.duration > 0.0)) throw ValidationError("synthetic video duration must be positive");
  if (!(profile.keyframe_min > 0.0) || profile.keyframe_max < profile.keyframe_min) {
    throw ValidationError("keyframe interval range invalid");
  }

  std::mt19937_64 rng(seed);
  VideoMeta video;
  video.video_id = profile.video_id;
  video.fps = profile.fps;
  video.ladder = ladder;

  // Keyframe lattice snapped to whole frames.
  const double frame = 1.0 / profile.fps;
  std::vector<double> durations;
  double t = 0.0;
  while (profile.duration - t > 1e-9) {
    double d = profile.keyframe_min + unit(rng) * (profile.keyframe_max - profile.keyframe_min);
    d = std::max(frame, std::round(d / frame) * frame);
    if (profile.keyframe_min == profile.keyframe_max) d = profile.keyframe_min;
    if (profile.duration - (t + d) < 0.5 * frame) d = profile.duration - t;
    durations.push_back(d);
    t += d;
  }

  double start = 0.0;
  for (double d : durations) {
    Fragment frag;
    frag.duration = d;
    const std::size_t n = seconds_for(d);

    std::vector<double> sample_c(n);
    std::vector<double> lengths(n);
    double frag_c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      lengths[k] = std::min(1.0, d - static_cast<double>(k));
      sample_c[k] = complexity_at(profile, start + static_cast<double>(k) + 0.5 * lengths[k]);
      frag_c += sample_c[k] * lengths[k];
    }
    frag_c /= d;

    const double rate_noise = 1.0 + profile.bitrate_noise * symmetric(rng);
    std::vector<double> vmaf_noise(n);
    for (auto& x : vmaf_noise) x = profile.vmaf_noise * symmetric(rng);

    for (const auto& track : ladder) {
      TrackFragment tf;
      const double kbps =
          std::min(kMaxBitrateFactor * track.kbps, track.kbps * bitrate_factor(frag_c) * rate_noise);
      tf.bytes = std::max<std::int64_t>(1, std::llround(kbps * 1000.0 / 8.0 * d));
      for (VmafModel m : kVmafModels) {
        auto& series = tf.vmaf[m];
        series.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          series[k] = std::clamp(model_vmaf(m, track.kbps, sample_c[k]) + vmaf_noise[k], 0.0, 100.0);
        }
      }
      frag.tracks.push_back(std::move(tf));
    }
    video.fragments.push_back(std::move(frag));
    start += d;
  }
  validate(video);
  return video;
}

}  // namespace adachunk
