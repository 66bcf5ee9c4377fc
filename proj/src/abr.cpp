#include "adachunk/abr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "adachunk/error.hpp"
#include "adachunk/stats.hpp"

namespace adachunk {

namespace {

std::span<const double> recent(std::span<const double> xs) {
  return xs.size() > kHistoryLength ? xs.last(kHistoryLength) : xs;
}

std::size_t option_of_track(const PlayUnit& unit, int track) {
  for (std::size_t i = 0; i < unit.options.size(); ++i) {
    if (!unit.options[i].is_augmentation() && unit.options[i].track == track) return i;
  }
  throw RuntimeError("unit has no option for track " + std::to_string(track));
}

std::optional<std::size_t> augmentation_in_gap(const PlayUnit& unit, int gap) {
  for (std::size_t i = 0; i < unit.options.size(); ++i) {
    if (unit.options[i].is_augmentation() && unit.options[i].track == gap) return i;
  }
  return std::nullopt;
}

int base_track_count(const PlayUnit& unit) {
  return static_cast<int>(std::count_if(unit.options.begin(), unit.options.end(),
                                        [](const UnitOption& o) { return !o.is_augmentation(); }));
}

}  // namespace

std::optional<double> estimate_bandwidth(std::span<const double> history) {
  if (history.empty()) return std::nullopt;
  return harmonic_mean(recent(history));
}

std::size_t rb_select(const AbrContext& ctx) {
  const auto est = estimate_bandwidth(ctx.throughput);
  const auto& unit = ctx.next();
  if (!est) return unit.lowest();
  std::size_t best = unit.lowest();
  for (std::size_t i = 0; i < unit.options.size(); ++i) {
    if (unit.options[i].kbps / 1000.0 <= *est) best = i;
  }
  return best;
}

std::size_t RateBased::select(const AbrContext& ctx) const { return rb_select(ctx); }

BbParams bb_update_reservoir(const VideoMeta& video, int next_fragment,
                             std::optional<double> estimate_mbps, BbParams params) {
  const double ceiling = std::max(params.min_reservoir, 0.5 * params.max_buffer);
  if (!estimate_mbps || *estimate_mbps <= 0.0) {
    params.reservoir = params.min_reservoir;
    return params;
  }
  double covered = 0.0;
  double megabits = 0.0;
  for (std::size_t f = static_cast<std::size_t>(next_fragment);
       f < video.fragment_count() && covered < params.reservoir_window; ++f) {
    const auto& frag = video.fragments[f];
    const double take = std::min(frag.duration, params.reservoir_window - covered);
    megabits += 8.0 * static_cast<double>(frag.tracks[0].bytes) / 1e6 * (take / frag.duration);
    covered += take;
  }
  const double raw = megabits / *estimate_mbps - covered;
  params.reservoir = std::clamp(raw, params.min_reservoir, ceiling);
  return params;
}

std::size_t bb_select(const PlayUnit& unit, double buffer, const BbParams& params) {
  const double r = params.reservoir;
  const double c = params.cushion;
  if (buffer < r) return unit.lowest();
  if (buffer >= r + c) return unit.highest();

  const int n = base_track_count(unit);
  const double pos = (buffer - r) / c * static_cast<double>(n - 1);
  const int lower = static_cast<int>(std::floor(pos));
  if (lower >= n - 1) return unit.highest();
  const double frac = pos - static_cast<double>(lower);
  if (const auto aug = augmentation_in_gap(unit, lower)) {
    // Three evenly spaced choices across the gap: lower track, augmentation, upper track.
    const auto step = static_cast<int>(std::round(frac * 2.0));
    if (step == 0) return option_of_track(unit, lower);
    if (step == 1) return *aug;
    return option_of_track(unit, lower + 1);
  }
  return option_of_track(unit, static_cast<int>(std::round(pos)));
}

std::size_t BufferBased::select(const AbrContext& ctx) const {
  BbParams p = params_;
  p.max_buffer = ctx.max_buffer;
  p = bb_update_reservoir(*ctx.video, ctx.next().first_fragment,
                          estimate_bandwidth(ctx.throughput), p);
  return bb_select(ctx.next(), ctx.buffer, p);
}

double mpc_quality(const UnitOption& o, const AbrContext& ctx, const MpcParams& p) {
  if (p.reward == MpcReward::oblivious) return 100.0 * o.kbps / ctx.ladder_max_kbps();
  return o.quality(p.decision_model);
}

double mpc_last_quality(const LastChoice& c, const AbrContext& ctx, const MpcParams& p) {
  if (p.reward == MpcReward::oblivious) return 100.0 * c.kbps / ctx.ladder_max_kbps();
  return c.mean_vmaf[static_cast<std::size_t>(p.decision_model)];
}

std::optional<double> robust_estimate(const AbrContext& ctx) {
  const auto est = estimate_bandwidth(ctx.throughput);
  if (!est) return std::nullopt;
  double max_err = 0.0;
  for (double e : recent(ctx.errors)) max_err = std::max(max_err, e);
  return *est / (1.0 + max_err);
}

namespace {

struct PlanStep {
  double duration = 0.0;
  std::vector<double> megabits;
  std::vector<double> quality;
};

struct PlanSearch {
  const std::vector<PlanStep>& steps;
  const QoeWeights& w;
  double estimate;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_first = 0;

  void run(std::size_t depth, double buffer, double reward, std::optional<double> q_prev,
           std::size_t first) {
    if (depth == steps.size()) {
      if (reward > best) {
        best = reward;
        best_first = first;
      }
      return;
    }
    const auto& s = steps[depth];
    for (std::size_t i = 0; i < s.quality.size(); ++i) {
      const double dl = s.megabits[i] / estimate;
      const double rebuffer = std::max(0.0, dl - buffer);
      const double next_buffer = std::max(buffer - dl, 0.0) + s.duration;
      const double q = s.quality[i];
      double step = w.lambda_per_s * s.duration * q - w.beta * rebuffer;
      if (q_prev) step -= w.gamma * std::abs(q - *q_prev);
      run(depth + 1, next_buffer, reward + step, q, depth == 0 ? i : first);
    }
  }
};

}  // namespace

std::size_t rmpc_select(const AbrContext& ctx, const MpcParams& params) {
  const auto est = robust_estimate(ctx);
  if (!est || *est <= 0.0) return ctx.next().lowest();

  const std::size_t horizon = std::min(params.horizon, ctx.upcoming_count());
  std::vector<PlanStep> steps(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const auto& unit = ctx.upcoming(h);
    steps[h].duration = unit.duration;
    for (const auto& o : unit.options) {
      steps[h].megabits.push_back(8.0 * static_cast<double>(o.bytes) / 1e6);
      steps[h].quality.push_back(mpc_quality(o, ctx, params));
    }
  }
  std::optional<double> q_prev;
  if (ctx.last) q_prev = mpc_last_quality(*ctx.last, ctx, params);

  PlanSearch search{steps, params.weights, *est};
  search.run(0, ctx.buffer, 0.0, q_prev, 0);
  return search.best_first;
}

std::unique_ptr<AbrPolicy> make_policy(std::string_view name, const AbrSettings& settings) {
  if (name == "rb") return std::make_unique<RateBased>();
  if (name == "bb") return std::make_unique<BufferBased>(settings.bb);
  if (name == "rmpc-o" || name == "rmpc-a") {
    MpcParams p = settings.mpc;
    p.reward = name == "rmpc-a" ? MpcReward::aware : MpcReward::oblivious;
    return std::make_unique<RobustMpc>(p);
  }
  throw ValidationError("unknown abr: " + std::string(name) + " (expected rb|bb|rmpc-o|rmpc-a)");
}

}  // namespace adachunk
