#include "adachunk/playlist.hpp"

#include <algorithm>

namespace adachunk {

double Playlist::duration() const {
  double d = 0.0;
  for (const auto& u : units) d += u.duration;
  return d;
}

PlayUnit make_unit(const VideoMeta& video, const Segment& seg, int segment_index,
                   std::span<const Augmentation> augs) {
  PlayUnit unit;
  unit.first_fragment = seg.first;
  unit.last_fragment = seg.last;
  unit.segment = segment_index;
  unit.duration = segment_duration(video, seg);
  unit.sample_lengths = segment_sample_lengths(video, seg);

  std::vector<std::pair<int, int>> gap_augs;  // (gap, index into augs)
  for (std::size_t a = 0; a < augs.size(); ++a) {
    if (segment_index >= 0 && augs[a].segment == segment_index) {
      gap_augs.emplace_back(augs[a].gap(), static_cast<int>(a));
    }
  }
  std::sort(gap_augs.begin(), gap_augs.end());

  auto add_track = [&](int j) {
    UnitOption o;
    o.track = j;
    o.bytes = segment_bytes(video, seg, j);
    o.kbps = kbps_of(o.bytes, unit.duration);
    o.vmaf = segment_vmaf(video, seg, j);
    for (VmafModel m : kVmafModels) {
      o.mean_vmaf[static_cast<std::size_t>(m)] = weighted_mean(o.vmaf[m], unit.sample_lengths);
    }
    unit.options.push_back(std::move(o));
  };

  std::size_t next_aug = 0;
  for (int j = 0; j < static_cast<int>(video.track_count()); ++j) {
    add_track(j);
    while (next_aug < gap_augs.size() && gap_augs[next_aug].first == j) {
      const auto& aug = augs[static_cast<std::size_t>(gap_augs[next_aug].second)];
      UnitOption o;
      o.track = j;
      o.augmentation = gap_augs[next_aug].second;
      o.bytes = aug.bytes;
      o.kbps = kbps_of(aug.bytes, unit.duration);
      o.vmaf = aug.vmaf;
      for (VmafModel m : kVmafModels) {
        o.mean_vmaf[static_cast<std::size_t>(m)] = weighted_mean(o.vmaf[m], unit.sample_lengths);
      }
      unit.options.push_back(std::move(o));
      ++next_aug;
    }
  }
  return unit;
}

std::vector<PlayUnit> fragment_units(const VideoMeta& video) {
  std::vector<PlayUnit> units;
  units.reserve(video.fragment_count());
  for (int f = 0; f < static_cast<int>(video.fragment_count()); ++f) {
    units.push_back(make_unit(video, Segment{f, f}, -1));
  }
  return units;
}

Playlist make_playlist(const VideoMeta& video, const Chunking& chunking) {
  Playlist p;
  p.units.reserve(chunking.segments.size());
  for (std::size_t s = 0; s < chunking.segments.size(); ++s) {
    p.units.push_back(
        make_unit(video, chunking.segments[s], static_cast<int>(s), chunking.augmentations));
  }
  return p;
}

}  // namespace adachunk
