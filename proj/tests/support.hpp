#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adachunk/media.hpp"
#include "adachunk/trace.hpp"

namespace adachunk::testing {

using BytesFn = std::function<std::int64_t(int fragment, int track)>;
using VmafFn = std::function<double(int fragment, int track, int second)>;

// Hand-built metadata; every VMAF model gets the same series.
inline VideoMeta make_video(const std::vector<double>& durations, const std::vector<double>& ladder_kbps,
                            const BytesFn& bytes, const VmafFn& vmaf) {
  VideoMeta v;
  v.video_id = "fixture";
  v.fps = 24.0;
  for (std::size_t j = 0; j < ladder_kbps.size(); ++j) {
    v.ladder.push_back({static_cast<int>(j), ladder_kbps[j], "t" + std::to_string(j)});
  }
  for (std::size_t f = 0; f < durations.size(); ++f) {
    Fragment frag;
    frag.duration = durations[f];
    const auto n = static_cast<int>(std::ceil(durations[f] - 1e-9));
    for (std::size_t j = 0; j < ladder_kbps.size(); ++j) {
      TrackFragment tf;
      tf.bytes = bytes(static_cast<int>(f), static_cast<int>(j));
      for (VmafModel m : kVmafModels) {
        for (int k = 0; k < n; ++k) tf.vmaf[m].push_back(vmaf(static_cast<int>(f), static_cast<int>(j), k));
      }
      frag.tracks.push_back(std::move(tf));
    }
    v.fragments.push_back(std::move(frag));
  }
  return v;
}

// Bytes that make a fragment exactly `kbps` over its duration.
inline std::int64_t bytes_at(double kbps, double duration) {
  return std::llround(kbps * 1000.0 / 8.0 * duration);
}

inline NetworkTrace constant_trace(double mbps, double duration = 10000.0, std::string id = "const") {
  return NetworkTrace(std::move(id), {{0.0, mbps}, {duration, mbps}}, TraceSource::cooked);
}

}  // namespace adachunk::testing
