#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adachunk/media.hpp"
#include "adachunk/search.hpp"

namespace adachunk {

enum class AugStrategy { lambda_v, lambda_b, lambda_bv, sigma_bv };

std::string_view to_string(AugStrategy s);
AugStrategy parse_aug_strategy(std::string_view s);

struct AugConfig {
  AugStrategy strategy = AugStrategy::lambda_bv;
  double vmaf_drop_threshold = 8.0;  // lambda_v
  double bitrate_excess = 10.0;      // B, percent
  double vmaf_gap = 10.0;            // V, points
  std::vector<double> grid_v{5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  std::vector<double> grid_b{5, 10, 15};
  int lookahead_segments = 5;
  VmafModel decision_model = VmafModel::uhd4k;
};

void validate(const AugConfig& cfg);

struct AugmentResult {
  std::vector<Augmentation> augmentations;  // sorted by (segment, gap)
  std::vector<std::string> log;             // sigma_bv: one JSON object per segment
  std::vector<std::string> warnings;
};

// Per segment, per track statistics on a segmentation.
using SegmentTable = std::vector<std::vector<SegmentStats>>;
SegmentTable segment_table(const VideoMeta& video, const Segmentation& segs);

// Synthesizes an augmentation in gap (gap, gap+1) of a segment: bytes follow
// the requested bitrate, VMAF is interpolated per second on log bitrate
// between the bracketing tracks. Empty when kbps is not strictly between the
// bracketing tracks' instantaneous bitrates.
std::optional<Augmentation> augment_encode(const VideoMeta& video, const Segment& seg,
                                           int segment_index, int gap, double kbps);

std::vector<Augmentation> lambda_v(const VideoMeta& video, const Segmentation& segs,
                                   const AugConfig& cfg, std::vector<std::string>* warnings = nullptr);
std::vector<Augmentation> lambda_b(const VideoMeta& video, const Segmentation& segs, double b_percent,
                                   std::vector<std::string>* warnings = nullptr);
std::vector<Augmentation> lambda_bv(const VideoMeta& video, const Segmentation& segs, double v_points,
                                    double b_percent, VmafModel model,
                                    std::vector<std::string>* warnings = nullptr);

AugmentResult sigma_bv(const VideoMeta& video, const Segmentation& segs, const AugConfig& cfg,
                       const SimDeps& deps);

// Dispatches on cfg.strategy; `deps` is required for sigma_bv.
AugmentResult augment(const VideoMeta& video, const Segmentation& segs, const AugConfig& cfg,
                      const SimDeps* deps = nullptr);

}  // namespace adachunk
