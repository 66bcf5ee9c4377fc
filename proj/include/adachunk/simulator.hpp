#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adachunk/abr.hpp"
#include "adachunk/media.hpp"
#include "adachunk/playlist.hpp"
#include "adachunk/trace.hpp"

namespace adachunk {

struct SimConfig {
  double rtt = 0.08;
  double max_buffer = 60.0;
  double startup_buffer = 10.0;
  bool rtt_in_throughput_sample = true;
  bool trace_looping = true;
  double idle_step = 0.1;
};

void validate(const SimConfig& cfg);

// Seconds from `start` until `bytes` have arrived, one RTT included.
double download_time(const NetworkTrace& trace, double start, std::int64_t bytes, double rtt,
                     bool looping = true);

// Mbps observed for a download; optionally excludes the RTT from the duration.
double throughput_sample(std::int64_t bytes, double download_duration, double rtt,
                         const SimConfig& cfg);

struct DownloadRecord {
  int unit = 0;
  int first_fragment = 0;
  int last_fragment = 0;
  int track = 0;
  int augmentation = -1;
  std::int64_t bytes = 0;
  double start = 0.0;
  double end = 0.0;
  double buffer_before = 0.0;
};

struct RebufferEvent {
  double start = 0.0;
  double duration = 0.0;
  double content_position = 0.0;  // playback position at which playback froze
};

// One second of content. `played` is the covered fraction (1 except for a
// trailing partial second); vmaf is the time-weighted mean over that span.
struct SecondSample {
  std::array<double, 3> vmaf{};
  double played = 1.0;

  double v(VmafModel m) const { return vmaf[static_cast<std::size_t>(m)]; }
  bool operator==(const SecondSample&) const = default;
};

// Everything needed to resume a simulation after the last downloaded unit.
struct PlayerState {
  double wall = 0.0;
  double buffer = 0.0;
  double content = 0.0;  // seconds of video downloaded
  bool started = false;
  double startup_delay = 0.0;
  double idle = 0.0;
  std::size_t next_unit = 0;

  std::vector<double> throughput;  // Mbps
  std::vector<double> errors;
  std::optional<double> pending_estimate;
  std::optional<LastChoice> last;

  std::vector<DownloadRecord> downloads;
  std::vector<RebufferEvent> rebuffers;
  std::vector<SecondSample> seconds;
  std::array<double, 3> open_sum{};
  double open_weight = 0.0;

  double playback_position() const { return content - buffer; }
};

struct SimOutcome {
  std::vector<DownloadRecord> downloads;
  std::vector<RebufferEvent> rebuffers;
  std::vector<SecondSample> seconds;
  double startup_delay = 0.0;
  double end_time = 0.0;  // wall time when playback finishes
  double video_duration = 0.0;
  double idle_time = 0.0;

  double stall_time() const;
  double total_rebuffer() const { return startup_delay + stall_time(); }
};

struct SimEnv {
  const VideoMeta& video;
  const AbrPolicy& abr;
  const NetworkTrace& trace;
  const SimConfig& cfg;
};

// Downloads playlist.units[state.next_unit] and advances the state past it.
void step(PlayerState& state, const Playlist& playlist, const SimEnv& env);

// Runs the remaining units of the playlist.
void run(PlayerState& state, const Playlist& playlist, const SimEnv& env);

// Plays out the buffer and closes the per-second series.
SimOutcome finish(PlayerState state);

SimOutcome simulate(const Playlist& playlist, const SimEnv& env);
SimOutcome simulate(const VideoMeta& video, const Chunking& chunking, const AbrPolicy& abr,
                    const NetworkTrace& trace, const SimConfig& cfg);

std::string outcome_to_json(const SimOutcome& outcome);
SimOutcome outcome_from_json(std::string_view text);

}  // namespace adachunk
