#include "adachunk/augmenter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>

#include <json.hpp>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/playlist.hpp"
#include "adachunk/stats.hpp"

namespace adachunk {

namespace {

constexpr double kEps = 1e-9;
using json = nlohmann::ordered_json;

bool at_least(double x, double threshold) { return x >= threshold - kEps * std::max(1.0, std::abs(threshold)); }

void sort_unique(std::vector<Augmentation>& augs) {
  std::stable_sort(augs.begin(), augs.end(), [](const Augmentation& a, const Augmentation& b) {
    return std::pair(a.segment, a.gap()) < std::pair(b.segment, b.gap());
  });
  augs.erase(std::unique(augs.begin(), augs.end(),
                         [](const Augmentation& a, const Augmentation& b) {
                           return a.segment == b.segment && a.gap() == b.gap();
                         }),
             augs.end());
}

void emit(std::vector<Augmentation>& out, const VideoMeta& video, const Segmentation& segs,
          int i, int gap, double kbps, std::vector<std::string>* warnings) {
  auto aug = augment_encode(video, segs[static_cast<std::size_t>(i)], i, gap, kbps);
  if (aug) {
    out.push_back(std::move(*aug));
  } else if (warnings != nullptr) {
    warnings->push_back("segment " + std::to_string(i) + ": dropped augmentation at " +
                        format_fixed(kbps, 1) + " kbps in gap (" + std::to_string(gap) + ", " +
                        std::to_string(gap + 1) + "), not strictly between its neighbors");
  }
}

}  // namespace

std::string_view to_string(AugStrategy s) {
  switch (s) {
    case AugStrategy::lambda_v: return "lambda_v";
    case AugStrategy::lambda_b: return "lambda_b";
    case AugStrategy::lambda_bv: return "lambda_bv";
    case AugStrategy::sigma_bv: return "sigma_bv";
  }
  return "?";
}

AugStrategy parse_aug_strategy(std::string_view s) {
  for (auto v : {AugStrategy::lambda_v, AugStrategy::lambda_b, AugStrategy::lambda_bv,
                 AugStrategy::sigma_bv}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown augmentation strategy: " + std::string(s));
}

void validate(const AugConfig& cfg) {
  if (!(cfg.vmaf_drop_threshold > 0.0)) throw ValidationError("vmaf drop threshold must be positive");
  if (!(cfg.bitrate_excess > 0.0)) throw ValidationError("bitrate excess threshold must be positive");
  if (!(cfg.vmaf_gap > 0.0)) throw ValidationError("vmaf gap threshold must be positive");
  if (cfg.grid_v.empty() || cfg.grid_b.empty()) throw ValidationError("sigma grid must be nonempty");
  for (double v : cfg.grid_v) {
    if (!(v > 0.0)) throw ValidationError("sigma grid V values must be positive");
  }
  for (double b : cfg.grid_b) {
    if (!(b > 0.0)) throw ValidationError("sigma grid B values must be positive");
  }
  if (cfg.lookahead_segments < 1) throw ValidationError("lookahead_segments must be >= 1");
}

SegmentTable segment_table(const VideoMeta& video, const Segmentation& segs) {
  SegmentTable t(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = 0; j < video.track_count(); ++j) {
      t[i].push_back(segment_stats(video, segs[i], static_cast<int>(j)));
    }
  }
  return t;
}

std::optional<Augmentation> augment_encode(const VideoMeta& video, const Segment& seg,
                                           int segment_index, int gap, double kbps) {
  if (gap < 0 || gap + 1 > video.top_track()) return std::nullopt;
  const auto lo = segment_stats(video, seg, gap);
  const auto hi = segment_stats(video, seg, gap + 1);
  if (!(kbps > lo.kbps && kbps < hi.kbps)) return std::nullopt;

  Augmentation a;
  a.segment = segment_index;
  a.kbps = kbps;
  a.bytes = std::llround(kbps * lo.duration * 1000.0 / 8.0);
  a.between = {gap, gap + 1};
  const double pos = (std::log(kbps) - std::log(lo.kbps)) / (std::log(hi.kbps) - std::log(lo.kbps));
  const auto vl = segment_vmaf(video, seg, gap);
  const auto vu = segment_vmaf(video, seg, gap + 1);
  for (VmafModel m : kVmafModels) {
    auto& out = a.vmaf[m];
    out.resize(vl[m].size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = vl[m][k] + pos * (vu[m][k] - vl[m][k]);
  }
  return a;
}

std::vector<Augmentation> lambda_v(const VideoMeta& video, const Segmentation& segs,
                                   const AugConfig& cfg, std::vector<std::string>* warnings) {
  const auto table = segment_table(video, segs);
  std::vector<Augmentation> out;
  const int top = video.top_track();
  std::vector<double> medians;
  for (int j = 0; j < top; ++j) {
    std::vector<double> v;
    for (const auto& row : table) v.push_back(row[static_cast<std::size_t>(j)].vmaf(cfg.decision_model));
    medians.push_back(median(v));
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (int j = 0; j < top; ++j) {
      const auto& s = table[i][static_cast<std::size_t>(j)];
      if (!at_least(medians[static_cast<std::size_t>(j)] - s.vmaf(cfg.decision_model),
                    cfg.vmaf_drop_threshold)) {
        continue;
      }
      const double kbps = (s.kbps + table[i][static_cast<std::size_t>(j + 1)].kbps) / 2.0;
      emit(out, video, segs, static_cast<int>(i), j, kbps, warnings);
    }
  }
  sort_unique(out);
  return out;
}

namespace {

std::vector<Augmentation> bitrate_rule(const VideoMeta& video, const Segmentation& segs,
                                       const SegmentTable& table, double b_percent,
                                       std::optional<double> v_points, VmafModel model,
                                       std::vector<std::string>* warnings) {
  std::vector<Augmentation> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = 1; j < video.track_count(); ++j) {
      const double avg = video.ladder[j].kbps;
      const auto& s = table[i][j];
      if (!at_least(s.kbps, (1.0 + b_percent / 100.0) * avg)) continue;
      if (v_points && !at_least(s.vmaf(model) - table[i][j - 1].vmaf(model), *v_points)) continue;
      emit(out, video, segs, static_cast<int>(i), static_cast<int>(j) - 1, avg, warnings);
    }
  }
  sort_unique(out);
  return out;
}

}  // namespace

std::vector<Augmentation> lambda_b(const VideoMeta& video, const Segmentation& segs, double b_percent,
                                   std::vector<std::string>* warnings) {
  return bitrate_rule(video, segs, segment_table(video, segs), b_percent, std::nullopt,
                      VmafModel::uhd4k, warnings);
}

std::vector<Augmentation> lambda_bv(const VideoMeta& video, const Segmentation& segs, double v_points,
                                    double b_percent, VmafModel model,
                                    std::vector<std::string>* warnings) {
  return bitrate_rule(video, segs, segment_table(video, segs), b_percent, v_points, model,
                      warnings);
}

AugmentResult sigma_bv(const VideoMeta& video, const Segmentation& segs, const AugConfig& cfg,
                       const SimDeps& deps) {
  AugmentResult res;
  const auto table = segment_table(video, segs);

  struct Plan {
    double v;
    double b;
    std::vector<Augmentation> augs;
  };
  std::vector<Plan> plans;
  for (double v : cfg.grid_v) {
    for (double b : cfg.grid_b) {
      plans.push_back({v, b, bitrate_rule(video, segs, table, b, v, cfg.decision_model,
                                          &res.warnings)});
    }
  }
  std::sort(res.warnings.begin(), res.warnings.end());
  res.warnings.erase(std::unique(res.warnings.begin(), res.warnings.end()), res.warnings.end());

  std::vector<PlayUnit> base;
  for (std::size_t i = 0; i < segs.size(); ++i) base.push_back(make_unit(video, segs[i], static_cast<int>(i)));
  const std::span<const PlayUnit> base_span(base);

  FrontierCache cache(video, deps);
  const int n = static_cast<int>(segs.size());
  for (int i = 0; i < n; ++i) {
    const int end = std::min(n, i + cfg.lookahead_segments);
    const auto window = base_span.subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(end - i));
    const auto tail = base_span.subspan(static_cast<std::size_t>(end));
    const double q_default = deps.aggregate.apply(cache.evaluate(window, tail));

    // Plans restricted to the window often coincide; score each distinct one once.
    std::map<std::vector<std::pair<int, int>>, double> seen;
    json entries = json::array();
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t p = 0; p < plans.size(); ++p) {
      std::vector<Augmentation> in_window;
      std::vector<std::pair<int, int>> key;
      std::int64_t bytes = 0;
      for (const auto& a : plans[p].augs) {
        if (a.segment >= i && a.segment < end) {
          in_window.push_back(a);
          key.emplace_back(a.segment, a.gap());
          bytes += a.bytes;
        }
      }
      json e{{"V", plans[p].v}, {"B", plans[p].b}, {"augmented_bytes", bytes}};
      if (bytes == 0) {
        e["score"] = nullptr;
        entries.push_back(e);
        continue;
      }
      double score = 0.0;
      if (auto it = seen.find(key); it != seen.end()) {
        score = it->second;
      } else {
        std::vector<PlayUnit> units;
        for (int s = i; s < end; ++s) {
          units.push_back(make_unit(video, segs[static_cast<std::size_t>(s)], s, in_window));
        }
        const double q = deps.aggregate.apply(cache.evaluate(units, tail));
        score = (q - q_default) / static_cast<double>(bytes);
        seen.emplace(key, score);
      }
      e["score"] = score;
      entries.push_back(e);
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }

    std::vector<Augmentation> committed;
    if (best) {
      for (const auto& a : plans[*best].augs) {
        if (a.segment == i) committed.push_back(a);
      }
    }
    json gaps = json::array();
    for (const auto& a : committed) gaps.push_back(a.gap());
    res.log.push_back(json{{"segment", i},
                           {"window", {i, end - 1}},
                           {"default_qoe", q_default},
                           {"plans", entries},
                           {"chosen", best ? json{{"V", plans[*best].v}, {"B", plans[*best].b}}
                                           : json(nullptr)},
                           {"committed_gaps", gaps}}
                          .dump());
    cache.commit(make_unit(video, segs[static_cast<std::size_t>(i)], i, committed));
    res.augmentations.insert(res.augmentations.end(), committed.begin(), committed.end());
  }
  sort_unique(res.augmentations);
  return res;
}

AugmentResult augment(const VideoMeta& video, const Segmentation& segs, const AugConfig& cfg,
                      const SimDeps* deps) {
  validate(cfg);
  validate(video);
  validate_partition(segs, video.fragment_count());
  AugmentResult res;
  switch (cfg.strategy) {
    case AugStrategy::lambda_v:
      res.augmentations = lambda_v(video, segs, cfg, &res.warnings);
      break;
    case AugStrategy::lambda_b:
      res.augmentations = lambda_b(video, segs, cfg.bitrate_excess, &res.warnings);
      break;
    case AugStrategy::lambda_bv:
      res.augmentations =
          lambda_bv(video, segs, cfg.vmaf_gap, cfg.bitrate_excess, cfg.decision_model, &res.warnings);
      break;
    case AugStrategy::sigma_bv:
      if (deps == nullptr || deps->traces.empty() || deps->abr == nullptr) {
        throw ValidationError("sigma_bv needs training traces and an abr");
      }
      res = sigma_bv(video, segs, cfg, *deps);
      break;
  }
  return res;
}

}  // namespace adachunk
