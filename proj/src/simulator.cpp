#include "adachunk/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "adachunk/error.hpp"

namespace adachunk {

namespace {

constexpr double kEps = 1e-9;

template <typename T>
void push_recent(std::vector<T>& xs, T x) {
  xs.push_back(x);
  if (xs.size() > kHistoryLength) xs.erase(xs.begin());
}

void close_bin(PlayerState& s) {
  SecondSample sample;
  for (std::size_t m = 0; m < 3; ++m) sample.vmaf[m] = s.open_sum[m] / s.open_weight;
  sample.played = s.open_weight >= 1.0 - kEps ? 1.0 : s.open_weight;
  s.seconds.push_back(sample);
  s.open_sum = {};
  s.open_weight = 0.0;
}

// Appends the option's per-second samples to the content timeline, re-binned
// on whole seconds of content.
void append_content(PlayerState& s, const PlayUnit& unit, const UnitOption& option) {
  for (std::size_t k = 0; k < unit.sample_lengths.size(); ++k) {
    double remaining = unit.sample_lengths[k];
    while (remaining > kEps) {
      const double take = std::min(1.0 - s.open_weight, remaining);
      for (VmafModel m : kVmafModels) {
        s.open_sum[static_cast<std::size_t>(m)] += option.vmaf[m][k] * take;
      }
      s.open_weight += take;
      remaining -= take;
      if (s.open_weight >= 1.0 - kEps) close_bin(s);
    }
  }
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.rtt < 0.0) throw ValidationError("rtt must be >= 0");
  if (cfg.startup_buffer > cfg.max_buffer) {
    throw ValidationError("startup buffer must not exceed max buffer");
  }
  if (!(cfg.idle_step > 0.0)) throw ValidationError("idle step must be positive");
}

double download_time(const NetworkTrace& trace, double start, std::int64_t bytes, double rtt,
                     bool looping) {
  const double begin = start + rtt;
  const double megabits = 8.0 * static_cast<double>(bytes) / 1e6;
  return rtt + (trace.time_to_deliver(begin, megabits, looping) - begin);
}

double throughput_sample(std::int64_t bytes, double download_duration, double rtt,
                         const SimConfig& cfg) {
  const double megabits = 8.0 * static_cast<double>(bytes) / 1e6;
  if (cfg.rtt_in_throughput_sample) return megabits / download_duration;
  return megabits / (download_duration - rtt);
}

double SimOutcome::stall_time() const {
  double t = 0.0;
  for (const auto& r : rebuffers) t += r.duration;
  return t;
}

void step(PlayerState& s, const Playlist& playlist, const SimEnv& env) {
  const auto& cfg = env.cfg;
  const std::size_t local = s.next_unit - playlist.first_unit;
  const auto& unit = playlist.units.at(local);

  if (s.started) {
    const double target = std::max(0.0, cfg.max_buffer - unit.duration);
    if (s.buffer > target + kEps) {
      const double steps = std::ceil((s.buffer - target) / cfg.idle_step - kEps);
      const double wait = std::min(steps * cfg.idle_step, s.buffer);
      s.buffer -= wait;
      s.wall += wait;
      s.idle += wait;
    }
  }

  s.pending_estimate = estimate_bandwidth(s.throughput);
  AbrContext ctx;
  ctx.buffer = s.buffer;
  ctx.max_buffer = cfg.max_buffer;
  ctx.throughput = s.throughput;
  ctx.errors = s.errors;
  ctx.last = s.last;
  ctx.units = std::span<const PlayUnit>(playlist.units).subspan(local);
  ctx.tail = playlist.tail;
  ctx.video = &env.video;
  const std::size_t choice = env.abr.select(ctx);
  if (choice >= unit.options.size()) throw RuntimeError("abr returned an invalid option");
  const auto& option = unit.options[choice];

  const double dt = download_time(env.trace, s.wall, option.bytes, cfg.rtt, cfg.trace_looping);
  s.downloads.push_back({static_cast<int>(s.next_unit), unit.first_fragment, unit.last_fragment,
                         option.track, option.augmentation, option.bytes, s.wall, s.wall + dt,
                         s.buffer});
  if (s.started) {
    if (s.buffer >= dt) {
      s.buffer -= dt;
    } else {
      s.rebuffers.push_back({s.wall + s.buffer, dt - s.buffer, s.content});
      s.buffer = 0.0;
    }
  }
  s.wall += dt;

  append_content(s, unit, option);
  s.buffer += unit.duration;
  s.content += unit.duration;

  const double sample = throughput_sample(option.bytes, dt, cfg.rtt, cfg);
  if (s.pending_estimate) push_recent(s.errors, std::abs(*s.pending_estimate - sample) / sample);
  push_recent(s.throughput, sample);
  s.last = LastChoice{option.track, option.augmentation, option.kbps, option.mean_vmaf};

  if (!s.started && s.buffer >= cfg.startup_buffer) {
    s.started = true;
    s.startup_delay = s.wall;
  }
  ++s.next_unit;
}

void run(PlayerState& state, const Playlist& playlist, const SimEnv& env) {
  if (state.next_unit < playlist.first_unit) throw RuntimeError("state is behind the playlist");
  while (state.next_unit < playlist.first_unit + playlist.units.size()) step(state, playlist, env);
}

SimOutcome finish(PlayerState s) {
  if (s.open_weight > kEps) close_bin(s);
  if (!s.started) {
    s.started = true;
    s.startup_delay = s.wall;
  }
  SimOutcome out;
  out.downloads = std::move(s.downloads);
  out.rebuffers = std::move(s.rebuffers);
  out.seconds = std::move(s.seconds);
  out.startup_delay = s.startup_delay;
  out.end_time = s.wall + s.buffer;
  out.video_duration = s.content;
  out.idle_time = s.idle;
  return out;
}

SimOutcome simulate(const Playlist& playlist, const SimEnv& env) {
  validate(env.cfg);
  PlayerState state;
  run(state, playlist, env);
  return finish(std::move(state));
}

SimOutcome simulate(const VideoMeta& video, const Chunking& chunking, const AbrPolicy& abr,
                    const NetworkTrace& trace, const SimConfig& cfg) {
  validate(chunking, video);
  const auto playlist = make_playlist(video, chunking);
  return simulate(playlist, SimEnv{video, abr, trace, cfg});
}

std::string outcome_to_json(const SimOutcome& o) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema"] = "sim-outcome/1";
  j["video_duration"] = o.video_duration;
  j["startup_delay"] = o.startup_delay;
  j["end_time"] = o.end_time;
  j["idle_time"] = o.idle_time;
  j["downloads"] = json::array();
  for (const auto& d : o.downloads) {
    j["downloads"].push_back({{"unit", d.unit},
                              {"fragments", {d.first_fragment, d.last_fragment}},
                              {"track", d.track},
                              {"augmentation", d.augmentation},
                              {"bytes", d.bytes},
                              {"start", d.start},
                              {"end", d.end},
                              {"buffer_before", d.buffer_before}});
  }
  j["rebuffers"] = json::array();
  for (const auto& r : o.rebuffers) {
    j["rebuffers"].push_back(
        {{"start", r.start}, {"duration", r.duration}, {"content_position", r.content_position}});
  }
  j["seconds"] = json::array();
  for (const auto& s : o.seconds) {
    json v = json::object();
    for (VmafModel m : kVmafModels) v[std::string(to_string(m))] = s.v(m);
    j["seconds"].push_back({{"vmaf", v}, {"played", s.played}});
  }
  return j.dump(1) + "\n";
}

SimOutcome outcome_from_json(std::string_view text) {
  using json = nlohmann::ordered_json;
  try {
    const auto j = json::parse(text);
    if (j.value("schema", std::string()) != "sim-outcome/1") {
      throw ValidationError("unsupported outcome schema (expected sim-outcome/1)");
    }
    SimOutcome o;
    o.video_duration = j.at("video_duration").get<double>();
    o.startup_delay = j.at("startup_delay").get<double>();
    o.end_time = j.at("end_time").get<double>();
    o.idle_time = j.value("idle_time", 0.0);
    for (const auto& d : j.at("downloads")) {
      const auto frags = d.at("fragments").get<std::vector<int>>();
      o.downloads.push_back({d.at("unit").get<int>(), frags.at(0), frags.at(1),
                             d.at("track").get<int>(), d.at("augmentation").get<int>(),
                             d.at("bytes").get<std::int64_t>(), d.at("start").get<double>(),
                             d.at("end").get<double>(), d.at("buffer_before").get<double>()});
    }
    for (const auto& r : j.at("rebuffers")) {
      o.rebuffers.push_back({r.at("start").get<double>(), r.at("duration").get<double>(),
                             r.at("content_position").get<double>()});
    }
    for (const auto& s : j.at("seconds")) {
      SecondSample sample;
      for (VmafModel m : kVmafModels) {
        sample.vmaf[static_cast<std::size_t>(m)] =
            s.at("vmaf").at(std::string(to_string(m))).get<double>();
      }
      sample.played = s.at("played").get<double>();
      o.seconds.push_back(sample);
    }
    return o;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("outcome parse error: ") + e.what());
  }
}

}  // namespace adachunk
