#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adachunk/media.hpp"
#include "adachunk/search.hpp"

namespace adachunk {

enum class SegStrategy { constant, per_fragment, time, bytes, time_bytes, sim, wide_eye };
enum class PenaltyKind { time, bytes, time_bytes };

std::string_view to_string(SegStrategy s);
SegStrategy parse_seg_strategy(std::string_view s);

struct SegConfig {
  SegStrategy strategy = SegStrategy::constant;
  int k = 5;
  int commit_window = 1;
  double target_len = 5.0;
  double penalty_rate = 0.2;
  std::optional<double> byte_target;  // default: bytes of 5 s of the top track
  int filter_width = 32;
  Aggregate aggregate;
  bool symmetric_bytes = false;

  // Defaults for a strategy (WideEye looks 10 ahead and commits 5).
  static SegConfig defaults(SegStrategy s);
};

void validate(const SegConfig& cfg);

// Bit i (counted from the window start) set means fragment first+i opens a
// new segment. Bits are read most-significant first, so numeric order of
// `bits` is lexicographic order of the decisions.
struct CandidateSequence {
  std::uint32_t bits = 0;
  int k = 0;
  std::vector<Segment> segments;
  double score = 0.0;

  bool opens(int i) const { return ((bits >> (k - 1 - i)) & 1U) != 0; }
};

// All 2^k decision patterns over fragments [first, first+k). With an open
// segment starting at `open_start`, a cleared first bit extends it; otherwise
// the first fragment always opens a segment.
std::vector<CandidateSequence> enumerate_candidates(int first, int k,
                                                    std::optional<int> open_start = {});

double default_byte_target(const VideoMeta& video);

// Mean per-segment penalty. Lower is better.
double heuristic_score(const std::vector<Segment>& segments, const VideoMeta& video,
                       const SegConfig& cfg, PenaltyKind kind);

struct SegmentResult {
  Segmentation segments;
  std::vector<std::string> log;  // one JSON object per window
};

// `deps` is required for sim and wide_eye.
SegmentResult segment(const VideoMeta& video, const SegConfig& cfg, const SimDeps* deps = nullptr);

}  // namespace adachunk
