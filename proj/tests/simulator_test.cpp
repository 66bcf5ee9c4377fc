#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <string>

#include "adachunk/abr.hpp"
#include "adachunk/error.hpp"
#include "adachunk/simulator.hpp"
#include "adachunk/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace adachunk;
using adachunk::testing::bytes_at;
using adachunk::testing::constant_trace;
using adachunk::testing::make_video;

namespace {

void expect_conservation(const SimOutcome& o) {
  EXPECT_NEAR(o.end_time, o.startup_delay + o.video_duration + o.stall_time(), 1e-6);
}

Chunking constant_chunking(const VideoMeta& v, int per) {
  Chunking c;
  const int n = static_cast<int>(v.fragment_count());
  for (int f = 0; f < n; f += per) c.segments.push_back({f, std::min(n, f + per) - 1});
  return c;
}

}  // namespace

TEST(DownloadTime, ConstantClosedForm) {
  EXPECT_NEAR(download_time(constant_trace(2.0), 0.0, 1'000'000, 0.08), 4.08, 1e-12);
}

TEST(DownloadTime, ZeroPayloadIsRtt) {
  EXPECT_NEAR(download_time(constant_trace(2.0), 3.0, 0, 0.08), 0.08, 1e-12);
}

TEST(DownloadTime, PiecewiseIntegration) {
  const auto t = parse_cooked("p", "0,1\n4,3\n1000,3\n");
  EXPECT_NEAR(download_time(t, 0.0, 1'000'000, 0.0), 4.0 + 4.0 / 3.0, 1e-9);
}

TEST(DownloadTime, ExactProductWithZeroRtt) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const double bw = 0.1 + static_cast<double>(rng() % 10000) / 100.0;
    const auto bytes = static_cast<std::int64_t>(1 + rng() % 5'000'000);
    const double dt = download_time(constant_trace(bw, 1e7), static_cast<double>(rng() % 100), bytes, 0.0);
    EXPECT_NEAR(dt * bw * 1e6, 8.0 * static_cast<double>(bytes), 1e-6 * 8.0 * static_cast<double>(bytes));
  }
}

TEST(DownloadTime, StalledTracePropagates) {
  const auto t = parse_cooked("z", "0,0\n10,0\n");
  EXPECT_THROW(download_time(t, 0.0, 1000, 0.08), RuntimeError);
}

TEST(ThroughputSample, RttQuirk) {
  SimConfig on;
  SimConfig off;
  off.rtt_in_throughput_sample = false;
  EXPECT_NEAR(throughput_sample(1'000'000, 4.08, 0.08, on), 1.961, 5e-4);
  EXPECT_NEAR(throughput_sample(1'000'000, 4.08, 0.08, off), 2.0, 1e-12);
  EXPECT_NEAR(throughput_sample(10'000, 0.12, 0.08, on), 0.667, 5e-4);
  EXPECT_NEAR(throughput_sample(10'000, 0.12, 0.08, off), 2.0, 1e-12);
}

TEST(Simulate, SingleTrackScheduleByHand) {
  const auto v = make_video(std::vector<double>(12, 5.0), {2000.0}, [](int, int) { return 1'250'000; },
                            [](int, int, int) { return 70.0; });
  Chunking c = constant_chunking(v, 1);
  SimConfig cfg;
  cfg.rtt = 0.0;
  RateBased rb;
  const auto o = simulate(v, c, rb, constant_trace(10.0), cfg);
  EXPECT_NEAR(o.startup_delay, 2.0, 1e-12);
  EXPECT_TRUE(o.rebuffers.empty());
  ASSERT_EQ(o.downloads.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(o.downloads[i].end - o.downloads[i].start, 1.0, 1e-12);
    EXPECT_NEAR(o.downloads[i].start, static_cast<double>(i), 1e-9);  // buffer never fills to 60 s
  }
  EXPECT_NEAR(o.end_time, 62.0, 1e-9);
  expect_conservation(o);
}

TEST(Simulate, StarvedLinkRebuffers) {
  const auto v = make_video(std::vector<double>(20, 4.0), {400.0, 800.0},
                            [](int, int j) { return bytes_at(j ? 800.0 : 400.0, 4.0); },
                            [](int, int j, int) { return j ? 80.0 : 60.0; });
  BufferBased bb;
  const auto o = simulate(v, constant_chunking(v, 1), bb, constant_trace(0.1), SimConfig{});
  EXPECT_GT(o.stall_time(), 0.0);
  expect_conservation(o);
}

TEST(Simulate, DeterministicAndSerializable) {
  SynthProfile p;
  p.keyframe_min = 0.5;
  p.keyframe_max = 3.0;
  const auto v = synth_video(p, small_ladder(), 2);
  const auto t = synth_trace("t", 1.2, 0.5, 200, 3);
  RobustMpc mpc(MpcParams{});
  const auto c = constant_chunking(v, 3);
  const auto a = simulate(v, c, mpc, t, SimConfig{});
  const auto b = simulate(v, c, mpc, t, SimConfig{});
  EXPECT_EQ(outcome_to_json(a), outcome_to_json(b));
  const auto back = outcome_from_json(outcome_to_json(a));
  EXPECT_EQ(outcome_to_json(back), outcome_to_json(a));
}

TEST(Simulate, IdleKeepsBufferBelowCap) {
  const auto v = make_video(std::vector<double>(40, 4.0), {300.0}, [](int, int) { return bytes_at(300.0, 4.0); },
                            [](int, int, int) { return 70.0; });
  RateBased rb;
  SimConfig cfg;
  const auto o = simulate(v, constant_chunking(v, 1), rb, constant_trace(50.0), cfg);
  for (const auto& d : o.downloads) EXPECT_LE(d.buffer_before, cfg.max_buffer + 1e-9);
  EXPECT_GT(o.idle_time, 0.0);
  expect_conservation(o);
}

TEST(Simulate, StateInvariantsRandomized) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> abrs{"rb", "bb", "rmpc-o", "rmpc-a"};
  for (int trial = 0; trial < 40; ++trial) {
    SynthProfile p;
    p.duration = 30 + static_cast<double>(rng() % 60);
    p.keyframe_min = 0.5;
    p.keyframe_max = 4.0;
    p.complexity = {{0, 0.3}, {p.duration / 2, 0.8}};
    const auto v = synth_video(p, small_ladder(), rng());
    const auto t = synth_trace("t", 0.3 + static_cast<double>(rng() % 50) / 10.0, 0.6, 80, rng());
    const auto policy = make_policy(abrs[trial % abrs.size()]);
    SimConfig cfg;
    cfg.trace_looping = (trial % 2) == 0;
    const auto o = simulate(v, constant_chunking(v, 1 + trial % 4), *policy, t, cfg);
    expect_conservation(o);
    EXPECT_NEAR(o.video_duration, v.total_duration(), 1e-9);
    double played = 0.0;
    for (const auto& s : o.seconds) played += s.played;
    EXPECT_NEAR(played, v.total_duration(), 1e-6);
    for (const auto& d : o.downloads) {
      EXPECT_GE(d.buffer_before, 0.0);
      EXPECT_LE(d.buffer_before, cfg.max_buffer + 1e-9);
    }
  }
}

TEST(Simulate, DoublingBandwidthNeverIncreasesRebuffer) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    SynthProfile p;
    p.duration = 60;
    p.keyframe_min = 1.0;
    p.keyframe_max = 3.0;
    const auto v = synth_video(p, small_ladder(), rng());
    const auto t = synth_trace("t", 0.2 + static_cast<double>(rng() % 30) / 10.0, 0.7, 100, rng());
    for (const char* name : {"rb", "bb"}) {
      const auto policy = make_policy(name);
      const auto c = constant_chunking(v, 2);
      const auto slow = simulate(v, c, *policy, t, SimConfig{});
      const auto fast = simulate(v, c, *policy, t.scaled(2.0), SimConfig{});
      EXPECT_LE(fast.stall_time(), slow.stall_time() + 1e-9) << name << " trial " << trial;
      if (std::string(name) == "bb") {
        EXPECT_LE(fast.total_rebuffer(), slow.total_rebuffer() + 1e-9) << name << " trial " << trial;
      }
    }
  }
}

// RB climbs the ladder sooner on a faster link, so its startup delay (and with
// it the startup-inclusive rebuffer total) can grow.
TEST(Simulate, RbStartupDelayIsNotMonotoneInBandwidth) {
  std::mt19937_64 rng(23);
  int counterexamples = 0;
  for (int trial = 0; trial < 60; ++trial) {
    SynthProfile p;
    p.duration = 60;
    p.keyframe_min = 1.0;
    p.keyframe_max = 3.0;
    const auto v = synth_video(p, small_ladder(), rng());
    const auto t = synth_trace("t", 0.2 + static_cast<double>(rng() % 30) / 10.0, 0.7, 100, rng());
    const auto policy = make_policy("rb");
    const auto c = constant_chunking(v, 2);
    const auto slow = simulate(v, c, *policy, t, SimConfig{});
    const auto fast = simulate(v, c, *policy, t.scaled(2.0), SimConfig{});
    if (fast.startup_delay > slow.startup_delay + 1e-9) ++counterexamples;
  }
  EXPECT_GT(counterexamples, 0);
}

TEST(Simulate, PerSecondSeriesFollowsChoices) {
  // Two tracks; a huge link makes RB pick the top track from the second unit on.
  const auto v = make_video({2.0, 2.0, 1.5}, {500.0, 1000.0},
                            [](int, int j) { return bytes_at(j ? 1000.0 : 500.0, 2.0); },
                            [](int f, int j, int k) { return 10.0 * f + (j ? 50.0 : 20.0) + k; });
  RateBased rb;
  SimConfig cfg;
  cfg.rtt = 0.0;
  const auto o = simulate(v, constant_chunking(v, 1), rb, constant_trace(100.0), cfg);
  ASSERT_EQ(o.seconds.size(), 6u);
  EXPECT_DOUBLE_EQ(o.seconds[0].v(VmafModel::hdtv), 20.0);
  EXPECT_DOUBLE_EQ(o.seconds[2].v(VmafModel::hdtv), 60.0);
  EXPECT_DOUBLE_EQ(o.seconds[4].v(VmafModel::hdtv), 70.0);
  EXPECT_DOUBLE_EQ(o.seconds[5].v(VmafModel::hdtv), 71.0);
  EXPECT_DOUBLE_EQ(o.seconds[4].played, 1.0);
  EXPECT_DOUBLE_EQ(o.seconds[5].played, 0.5);
}

TEST(Simulate, InvalidConfig) {
  SimConfig cfg;
  cfg.startup_buffer = 100;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.rtt = -1;
  EXPECT_THROW(validate(cfg), ValidationError);
}
