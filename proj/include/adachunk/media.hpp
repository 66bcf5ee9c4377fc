#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adachunk {

enum class VmafModel { mobile = 0, hdtv = 1, uhd4k = 2 };

inline constexpr std::array<VmafModel, 3> kVmafModels{VmafModel::mobile, VmafModel::hdtv,
                                                      VmafModel::uhd4k};

std::string_view to_string(VmafModel m);
VmafModel parse_vmaf_model(std::string_view s);

// Per-second VMAF series for each of the three viewing models. Entry k of a
// fragment's series covers [k, min(k + 1, duration)) of that fragment.
struct VmafSeries {
  std::array<std::vector<double>, 3> by_model;

  const std::vector<double>& operator[](VmafModel m) const {
    return by_model[static_cast<std::size_t>(m)];
  }
  std::vector<double>& operator[](VmafModel m) { return by_model[static_cast<std::size_t>(m)]; }

  bool operator==(const VmafSeries&) const = default;
};

struct Track {
  int id = 0;
  double kbps = 0.0;  // target average bitrate
  std::string label;

  bool operator==(const Track&) const = default;
};

struct TrackFragment {
  std::int64_t bytes = 0;
  VmafSeries vmaf;

  bool operator==(const TrackFragment&) const = default;
};

// Span between two successive keyframes, encoded on every track of the ladder.
struct Fragment {
  double duration = 0.0;
  std::vector<TrackFragment> tracks;  // indexed by track id

  bool operator==(const Fragment&) const = default;
};

struct VideoMeta {
  std::string video_id;
  double fps = 0.0;
  std::vector<Track> ladder;
  std::vector<Fragment> fragments;

  std::size_t track_count() const { return ladder.size(); }
  std::size_t fragment_count() const { return fragments.size(); }
  int top_track() const { return static_cast<int>(ladder.size()) - 1; }
  double total_duration() const;

  bool operator==(const VideoMeta&) const = default;
};

// Inclusive fragment range.
struct Segment {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  bool operator==(const Segment&) const = default;
};

using Segmentation = std::vector<Segment>;

struct Augmentation {
  int segment = 0;
  double kbps = 0.0;
  std::int64_t bytes = 0;
  VmafSeries vmaf;
  std::pair<int, int> between{0, 1};  // adjacent track ids bracketing kbps

  int gap() const { return between.first; }
  bool operator==(const Augmentation&) const = default;
};

struct Chunking {
  Segmentation segments;
  std::vector<Augmentation> augmentations;

  bool operator==(const Chunking&) const = default;
};

struct SegmentStats {
  double duration = 0.0;
  std::int64_t bytes = 0;
  double kbps = 0.0;  // instantaneous bitrate over the segment
  std::array<double, 3> mean_vmaf{};

  double vmaf(VmafModel m) const { return mean_vmaf[static_cast<std::size_t>(m)]; }
};

// Number of per-second samples a span of the given duration carries.
std::size_t seconds_for(double duration);

double segment_duration(const VideoMeta& video, const Segment& seg);
std::int64_t segment_bytes(const VideoMeta& video, const Segment& seg, int track);
SegmentStats segment_stats(const VideoMeta& video, const Segment& seg, int track);

// Concatenation of member fragment series and the time each sample covers.
VmafSeries segment_vmaf(const VideoMeta& video, const Segment& seg, int track);
std::vector<double> segment_sample_lengths(const VideoMeta& video, const Segment& seg);

// Duration-weighted mean of a per-second series whose samples cover `lengths`.
double weighted_mean(const std::vector<double>& series, const std::vector<double>& lengths);

inline double kbps_of(std::int64_t bytes, double duration) {
  return 8.0 * static_cast<double>(bytes) / 1000.0 / duration;
}

// Throws ValidationError naming the violated invariant.
void validate(const VideoMeta& video);
void validate(const Chunking& chunking, const VideoMeta& video);
void validate_partition(const Segmentation& segs, std::size_t fragment_count);

VideoMeta load_video(const std::filesystem::path& path);
void save_video(const VideoMeta& video, const std::filesystem::path& path);
std::string video_to_json(const VideoMeta& video);
VideoMeta video_from_json(std::string_view text);

Chunking load_chunking(const std::filesystem::path& path);
void save_chunking(const Chunking& chunking, const std::filesystem::path& path);
std::string chunking_to_json(const Chunking& chunking);
Chunking chunking_from_json(std::string_view text);

}  // namespace adachunk
