#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "adachunk/media.hpp"

namespace adachunk {

// One downloadable representation of a unit: a base track or an augmentation.
struct UnitOption {
  int track = 0;          // base track id; lower bracketing track for augmentations
  int augmentation = -1;  // index into the augmentation list the unit was built from
  std::int64_t bytes = 0;
  double kbps = 0.0;  // instantaneous bitrate over the unit
  std::array<double, 3> mean_vmaf{};
  VmafSeries vmaf;  // per-second samples, aligned with PlayUnit::sample_lengths

  bool is_augmentation() const { return augmentation >= 0; }
  double quality(VmafModel m) const { return mean_vmaf[static_cast<std::size_t>(m)]; }
};

// A segment (or a raw fragment used only for lookahead) as the player sees it.
// Options are in ladder order: track 0, augmentation in gap (0,1), track 1, ...
struct PlayUnit {
  int first_fragment = 0;
  int last_fragment = 0;
  int segment = -1;  // index in the segmentation; -1 for raw fragment units
  double duration = 0.0;
  std::vector<double> sample_lengths;
  std::vector<UnitOption> options;

  std::size_t lowest() const { return 0; }
  std::size_t highest() const { return options.size() - 1; }
};

// Units to download in order, plus read-only units that extend the ABR's
// lookahead past the end of `units`.
struct Playlist {
  std::vector<PlayUnit> units;
  std::span<const PlayUnit> tail;
  std::size_t first_unit = 0;  // play index of units[0] when resuming mid-video

  double duration() const;
};

// `augs` may contain augmentations for any segment; only those whose segment
// index equals `segment_index` are attached.
PlayUnit make_unit(const VideoMeta& video, const Segment& seg, int segment_index,
                   std::span<const Augmentation> augs = {});

std::vector<PlayUnit> fragment_units(const VideoMeta& video);

Playlist make_playlist(const VideoMeta& video, const Chunking& chunking);

}  // namespace adachunk
