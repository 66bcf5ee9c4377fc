#include "adachunk/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <json.hpp>

#include "adachunk/error.hpp"
#include "adachunk/playlist.hpp"

namespace adachunk {

namespace {

constexpr double kEps = 1e-9;
using json = nlohmann::ordered_json;

bool better(double score, std::size_t segs, std::uint32_t bits, double best_score,
            std::size_t best_segs, std::uint32_t best_bits, bool higher_is_better) {
  if (score != best_score) return higher_is_better ? score > best_score : score < best_score;
  if (segs != best_segs) return segs < best_segs;
  return bits < best_bits;
}

std::size_t pick(const std::vector<CandidateSequence>& cands, bool higher_is_better) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const auto& c = cands[i];
    const auto& b = cands[best];
    if (better(c.score, c.segments.size(), c.bits, b.score, b.segments.size(), b.bits,
               higher_is_better)) {
      best = i;
    }
  }
  return best;
}

PenaltyKind penalty_of(SegStrategy s) {
  if (s == SegStrategy::time) return PenaltyKind::time;
  if (s == SegStrategy::bytes) return PenaltyKind::bytes;
  return PenaltyKind::time_bytes;
}

json scores_json(const std::vector<CandidateSequence>& cands) {
  json arr = json::array();
  for (const auto& c : cands) {
    arr.push_back({{"bits", c.bits}, {"segments", c.segments.size()}, {"score", c.score}});
  }
  return arr;
}

Segmentation constant(const VideoMeta& video, double target) {
  Segmentation out;
  const int n = static_cast<int>(video.fragment_count());
  int start = 0;
  double acc = 0.0;
  for (int f = 0; f < n; ++f) {
    acc += video.fragments[static_cast<std::size_t>(f)].duration;
    if (acc >= target - kEps || f == n - 1) {
      out.push_back({start, f});
      start = f + 1;
      acc = 0.0;
    }
  }
  return out;
}

// Time / Bytes / Time+Bytes: the frontier always sits on a segment start and
// the first segment of the best candidate is committed.
SegmentResult heuristic(const VideoMeta& video, const SegConfig& cfg) {
  SegmentResult res;
  const int n = static_cast<int>(video.fragment_count());
  const PenaltyKind kind = penalty_of(cfg.strategy);
  int f = 0;
  while (f < n) {
    const int kw = std::min(cfg.k, n - f);
    auto cands = enumerate_candidates(f, kw);
    for (auto& c : cands) c.score = heuristic_score(c.segments, video, cfg, kind);
    const auto& best = cands[pick(cands, false)];
    const Segment first = best.segments.front();
    res.segments.push_back(first);
    res.log.push_back(json{{"frontier", f},
                           {"window", kw},
                           {"candidates", scores_json(cands)},
                           {"chosen", best.bits},
                           {"committed", {first.first, first.last}}}
                          .dump());
    f = first.last + 1;
  }
  return res;
}

// Sim / WideEye: decisions are committed one fragment at a time; the segment
// containing the frontier stays open until a later decision closes it.
SegmentResult simulated(const VideoMeta& video, const SegConfig& cfg, const SimDeps& deps) {
  SegmentResult res;
  const int n = static_cast<int>(video.fragment_count());
  const auto raw = fragment_units(video);
  const std::span<const PlayUnit> raw_span(raw);
  FrontierCache cache(video, deps);
  const bool wide = cfg.strategy == SegStrategy::wide_eye;

  std::optional<int> open;
  auto close_open = [&](int last) {
    const Segment seg{*open, last};
    cache.commit(make_unit(video, seg, static_cast<int>(res.segments.size())));
    res.segments.push_back(seg);
  };

  int f = 0;
  while (f < n) {
    const int kw = std::min(cfg.k, n - f);
    auto cands = enumerate_candidates(f, kw, open);

    std::vector<CandidateSequence> pool;
    if (wide) {
      for (auto& c : cands) c.score = heuristic_score(c.segments, video, cfg, PenaltyKind::time_bytes);
      std::vector<std::size_t> order(cands.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = cands[a];
        const auto& y = cands[b];
        return better(x.score, x.segments.size(), x.bits, y.score, y.segments.size(), y.bits,
                      false);
      });
      const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(cfg.filter_width));
      for (std::size_t i = 0; i < keep; ++i) pool.push_back(cands[order[i]]);
    } else {
      pool = std::move(cands);
    }

    const auto tail = raw_span.subspan(static_cast<std::size_t>(f + kw));
    const int base_index = static_cast<int>(res.segments.size());
    for (auto& c : pool) {
      std::vector<PlayUnit> units;
      units.reserve(c.segments.size());
      for (std::size_t s = 0; s < c.segments.size(); ++s) {
        units.push_back(make_unit(video, c.segments[s], base_index + static_cast<int>(s)));
      }
      const auto q = cache.evaluate(units, tail);
      c.score = deps.aggregate.apply(q);
    }
    const auto& best = pool[pick(pool, true)];

    const int commit = std::min(cfg.commit_window, kw);
    const std::optional<int> open_before = open;
    for (int i = 0; i < commit; ++i) {
      if (!open) {
        open = f + i;
      } else if (best.opens(i)) {
        close_open(f + i - 1);
        open = f + i;
      }
    }
    res.log.push_back(json{{"frontier", f},
                           {"window", kw},
                           {"open_start", open_before ? json(*open_before) : json(nullptr)},
                           {"candidates", scores_json(pool)},
                           {"chosen", best.bits},
                           {"committed_decisions", commit}}
                          .dump());
    f += commit;
  }
  if (open) close_open(n - 1);
  return res;
}

}  // namespace

std::string_view to_string(SegStrategy s) {
  switch (s) {
    case SegStrategy::constant: return "constant";
    case SegStrategy::per_fragment: return "per_fragment";
    case SegStrategy::time: return "time";
    case SegStrategy::bytes: return "bytes";
    case SegStrategy::time_bytes: return "time_bytes";
    case SegStrategy::sim: return "sim";
    case SegStrategy::wide_eye: return "wide_eye";
  }
  return "?";
}

SegStrategy parse_seg_strategy(std::string_view s) {
  for (auto v : {SegStrategy::constant, SegStrategy::per_fragment, SegStrategy::time,
                 SegStrategy::bytes, SegStrategy::time_bytes, SegStrategy::sim,
                 SegStrategy::wide_eye}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown segmentation strategy: " + std::string(s));
}

SegConfig SegConfig::defaults(SegStrategy s) {
  SegConfig cfg;
  cfg.strategy = s;
  if (s == SegStrategy::wide_eye) {
    cfg.k = 10;
    cfg.commit_window = 5;
  }
  return cfg;
}

void validate(const SegConfig& cfg) {
  if (cfg.k < 1 || cfg.k > 20) throw ValidationError("k must be in [1, 20]");
  if (cfg.commit_window < 1 || cfg.commit_window > cfg.k) {
    throw ValidationError("commit_window must be in [1, k]");
  }
  if (cfg.filter_width < 1 || cfg.filter_width > (1 << cfg.k)) {
    throw ValidationError("filter_width must be in [1, 2^k]");
  }
  if (!(cfg.target_len > 0.0)) throw ValidationError("target_len must be positive");
  if (cfg.penalty_rate < 0.0) throw ValidationError("penalty_rate must be >= 0");
  if (cfg.byte_target && !(*cfg.byte_target > 0.0)) {
    throw ValidationError("byte_target must be positive");
  }
}

std::vector<CandidateSequence> enumerate_candidates(int first, int k,
                                                    std::optional<int> open_start) {
  if (k < 1) throw ValidationError("candidate window must be nonempty");
  if (k > 30) throw ValidationError("candidate window too large");
  std::vector<CandidateSequence> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << k); ++bits) {
    CandidateSequence c;
    c.bits = bits;
    c.k = k;
    int start = first;
    if (open_start) {
      if (c.opens(0)) {
        c.segments.push_back({*open_start, first - 1});
      } else {
        start = *open_start;
      }
    }
    for (int i = 1; i < k; ++i) {
      if (c.opens(i)) {
        c.segments.push_back({start, first + i - 1});
        start = first + i;
      }
    }
    c.segments.push_back({start, first + k - 1});
    out.push_back(std::move(c));
  }
  return out;
}

double default_byte_target(const VideoMeta& video) {
  const int top = video.top_track();
  double bytes = 0.0;
  for (const auto& f : video.fragments) {
    bytes += static_cast<double>(f.tracks[static_cast<std::size_t>(top)].bytes);
  }
  return bytes / video.total_duration() * 5.0;
}

double heuristic_score(const std::vector<Segment>& segments, const VideoMeta& video,
                       const SegConfig& cfg, PenaltyKind kind) {
  if (segments.empty()) return 0.0;
  const double target = cfg.byte_target.value_or(default_byte_target(video));
  const int top = video.top_track();
  double total = 0.0;
  for (const auto& seg : segments) {
    double p = 0.0;
    if (kind != PenaltyKind::bytes) {
      p += cfg.penalty_rate * std::abs(segment_duration(video, seg) - cfg.target_len);
    }
    if (kind != PenaltyKind::time) {
      const double ratio = static_cast<double>(segment_bytes(video, seg, top)) / target - 1.0;
      p += cfg.penalty_rate * (cfg.symmetric_bytes ? std::abs(ratio) : std::max(0.0, ratio));
    }
    total += p;
  }
  return total / static_cast<double>(segments.size());
}

SegmentResult segment(const VideoMeta& video, const SegConfig& cfg, const SimDeps* deps) {
  validate(cfg);
  validate(video);
  SegmentResult res;
  switch (cfg.strategy) {
    case SegStrategy::constant:
      res.segments = constant(video, cfg.target_len);
      break;
    case SegStrategy::per_fragment:
      for (int f = 0; f < static_cast<int>(video.fragment_count()); ++f) {
        res.segments.push_back({f, f});
      }
      break;
    case SegStrategy::time:
    case SegStrategy::bytes:
    case SegStrategy::time_bytes:
      res = heuristic(video, cfg);
      break;
    case SegStrategy::sim:
    case SegStrategy::wide_eye:
      if (deps == nullptr || deps->traces.empty()) {
        throw ValidationError(std::string(to_string(cfg.strategy)) +
                              " segmentation needs training traces");
      }
      if (deps->abr == nullptr) {
        throw ValidationError(std::string(to_string(cfg.strategy)) + " segmentation needs an abr");
      }
      res = simulated(video, cfg, *deps);
      break;
  }
  validate_partition(res.segments, video.fragment_count());
  return res;
}

}  // namespace adachunk
