#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "adachunk/media.hpp"
#include "adachunk/playlist.hpp"
#include "adachunk/qoe_weights.hpp"

namespace adachunk {

inline constexpr std::size_t kHistoryLength = 5;

struct LastChoice {
  int track = 0;
  int augmentation = -1;
  double kbps = 0.0;
  std::array<double, 3> mean_vmaf{};
};

// What a rate-adaptation policy sees when choosing the option for the next unit.
struct AbrContext {
  double buffer = 0.0;  // seconds of unplayed video
  double max_buffer = 60.0;
  std::span<const double> throughput;  // Mbps, oldest first, at most kHistoryLength
  std::span<const double> errors;      // relative estimate errors, oldest first
  std::optional<LastChoice> last;
  // Next units in play order; `tail` continues where `units` ends.
  std::span<const PlayUnit> units;
  std::span<const PlayUnit> tail;
  const VideoMeta* video = nullptr;

  std::size_t upcoming_count() const { return units.size() + tail.size(); }
  const PlayUnit& upcoming(std::size_t h) const {
    return h < units.size() ? units[h] : tail[h - units.size()];
  }
  const PlayUnit& next() const { return upcoming(0); }
  double ladder_max_kbps() const { return video->ladder.back().kbps; }
};

// Harmonic mean of the last kHistoryLength samples; nullopt when history is empty.
std::optional<double> estimate_bandwidth(std::span<const double> history);

class AbrPolicy {
 public:
  virtual ~AbrPolicy() = default;
  // Index into ctx.next().options.
  virtual std::size_t select(const AbrContext& ctx) const = 0;
  // Number of units (including the one being chosen) a decision may inspect.
  virtual std::size_t lookahead_units() const { return 1; }
  virtual std::string name() const = 0;
};

// Highest option whose instantaneous bitrate fits under the estimate.
class RateBased final : public AbrPolicy {
 public:
  std::size_t select(const AbrContext& ctx) const override;
  std::string name() const override { return "rb"; }
};

std::size_t rb_select(const AbrContext& ctx);

struct BbParams {
  double reservoir = 8.0;  // overwritten by the dynamic update each decision
  double cushion = 20.0;
  double min_reservoir = 8.0;
  double reservoir_window = 20.0;  // seconds of lowest-track video the reservoir must cover
  double max_buffer = 60.0;
};

// Dynamic reservoir: time to fetch the next `reservoir_window` seconds of
// lowest-track video at the estimate, minus that playback time, clamped to
// [min_reservoir, max_buffer / 2].
BbParams bb_update_reservoir(const VideoMeta& video, int next_fragment,
                             std::optional<double> estimate_mbps, BbParams params);

std::size_t bb_select(const PlayUnit& unit, double buffer, const BbParams& params);

class BufferBased final : public AbrPolicy {
 public:
  explicit BufferBased(BbParams params = {}) : params_(params) {}
  std::size_t select(const AbrContext& ctx) const override;
  std::string name() const override { return "bb"; }
  const BbParams& params() const { return params_; }

 private:
  BbParams params_;
};

enum class MpcReward { oblivious, aware };

struct MpcParams {
  std::size_t horizon = 5;
  MpcReward reward = MpcReward::aware;
  QoeWeights weights;
  VmafModel decision_model = VmafModel::uhd4k;
};

// Per-step quality term used by both reward variants: bitrate scaled so the
// ladder's top average maps to 100, or mean decision-model VMAF.
double mpc_quality(const UnitOption& o, const AbrContext& ctx, const MpcParams& p);
double mpc_last_quality(const LastChoice& c, const AbrContext& ctx, const MpcParams& p);

// estimate / (1 + max recent relative error); nullopt without history.
std::optional<double> robust_estimate(const AbrContext& ctx);

std::size_t rmpc_select(const AbrContext& ctx, const MpcParams& params);

class RobustMpc final : public AbrPolicy {
 public:
  explicit RobustMpc(MpcParams params = {}) : params_(params) {}
  std::size_t select(const AbrContext& ctx) const override { return rmpc_select(ctx, params_); }
  std::size_t lookahead_units() const override { return params_.horizon; }
  std::string name() const override {
    return params_.reward == MpcReward::aware ? "rmpc-a" : "rmpc-o";
  }
  const MpcParams& params() const { return params_; }

 private:
  MpcParams params_;
};

struct AbrSettings {
  BbParams bb;
  MpcParams mpc;
};

// "rb", "bb", "rmpc-o", "rmpc-a".
std::unique_ptr<AbrPolicy> make_policy(std::string_view name, const AbrSettings& settings = {});

}  // namespace adachunk
