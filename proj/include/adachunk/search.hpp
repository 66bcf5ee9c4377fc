#pragma once

#include <span>
#include <string>
#include <vector>

#include "adachunk/abr.hpp"
#include "adachunk/playlist.hpp"
#include "adachunk/qoe_weights.hpp"
#include "adachunk/simulator.hpp"
#include "adachunk/trace.hpp"

namespace adachunk {

// How per-trace QoE values are combined into one score.
struct Aggregate {
  enum class Kind { mean, percentile } kind = Kind::mean;
  double p = 50.0;

  double apply(std::span<const double> qoes) const;
  static Aggregate parse(std::string_view s);  // "mean" or "p<number>", e.g. "p5"
  std::string to_string() const;
};

// Everything a simulation-guided search needs to score a candidate.
struct SimDeps {
  const AbrPolicy* abr = nullptr;
  std::vector<const NetworkTrace*> traces;
  SimConfig sim;
  QoeWeights weights;
  VmafModel decision_model = VmafModel::uhd4k;
  Aggregate aggregate;
};

// Per-trace player states frozen after a prefix of committed units. A unit is
// folded into the cached states only once every unit its ABR decision can
// inspect is committed, so a cached run is identical to a from-scratch run of
// any continuation sharing the committed prefix.
class FrontierCache {
 public:
  FrontierCache(const VideoMeta& video, const SimDeps& deps);

  // Appends units whose composition is final.
  void commit(PlayUnit unit);
  std::size_t committed() const { return committed_.size(); }
  std::size_t cached() const { return cached_; }

  // Per-trace QoE of committed units + continuation, with `tail` visible to
  // the ABR lookahead only.
  std::vector<double> evaluate(std::span<const PlayUnit> continuation,
                               std::span<const PlayUnit> tail) const;

  // Per-trace outcomes of the same run.
  std::vector<SimOutcome> outcomes(std::span<const PlayUnit> continuation,
                                   std::span<const PlayUnit> tail) const;

 private:
  void advance();

  const VideoMeta& video_;
  const SimDeps& deps_;
  std::vector<PlayUnit> committed_;
  std::vector<PlayerState> states_;
  std::size_t cached_ = 0;
};

}  // namespace adachunk
