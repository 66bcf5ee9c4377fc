#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/trace.hpp"

using namespace adachunk;

TEST(Cooked, ConstantIngestion) {
  const auto t = parse_cooked("c", "0,2\n10,2\n");
  EXPECT_DOUBLE_EQ(t.duration(), 10.0);
  EXPECT_DOUBLE_EQ(t.mbps_at(0.0, false), 2.0);
  EXPECT_DOUBLE_EQ(t.mbps_at(9.99, false), 2.0);
  EXPECT_DOUBLE_EQ(t.mean_mbps(), 2.0);
}

TEST(Cooked, PiecewiseConstant) {
  const auto t = parse_cooked("p", "0,1\n5,3\n");
  EXPECT_DOUBLE_EQ(t.mbps_at(4.999, false), 1.0);
  EXPECT_DOUBLE_EQ(t.mbps_at(5.0, false), 3.0);
  EXPECT_DOUBLE_EQ(t.mbps_at(100.0, false), 3.0);
}

TEST(Cooked, Errors) {
  EXPECT_THROW(parse_cooked("x", "0,2\n-1,2\n"), ValidationError);
  EXPECT_THROW(parse_cooked("x", "0,2\n1,-2\n"), ValidationError);
  EXPECT_THROW(parse_cooked("x", "0,2\n"), ValidationError);
  EXPECT_THROW(parse_cooked("x", "0,abc\n1,2\n"), ValidationError);
}

TEST(Cooked, Integration) {
  const auto t = parse_cooked("p", "0,1\n4,3\n10,3\n");
  EXPECT_NEAR(t.megabits_between(0.0, 4.0, true), 4.0, 1e-12);
  EXPECT_NEAR(t.megabits_between(2.0, 6.0, true), 2.0 + 6.0, 1e-12);
  // Looping: [10, 14) replays [0, 4) at 1 Mbps.
  EXPECT_NEAR(t.megabits_between(10.0, 14.0, true), 4.0, 1e-12);
  EXPECT_NEAR(t.megabits_between(10.0, 14.0, false), 12.0, 1e-12);
  EXPECT_NEAR(t.time_to_deliver(0.0, 8.0, true), 4.0 + 4.0 / 3.0, 1e-12);
}

TEST(Cooked, StalledTrace) {
  const auto t = parse_cooked("z", "0,0\n5,0\n");
  EXPECT_THROW(t.time_to_deliver(0.0, 1.0, true), RuntimeError);
  const auto tail_zero = parse_cooked("z2", "0,1\n5,0\n");
  EXPECT_THROW(tail_zero.time_to_deliver(0.0, 10.0, false), RuntimeError);
}

TEST(Mahimahi, UniformOpportunitiesMean) {
  // 1000 opportunities uniformly over 12,000 ms.
  std::string text;
  for (int i = 1; i <= 1000; ++i) text += std::to_string(i * 12) + "\n";
  const auto t = parse_mahimahi("m", text);
  EXPECT_NEAR(t.mean_mbps(), 1.0, 0.02);
}

TEST(Mahimahi, OnePerMillisecond) {
  std::string text;
  for (int i = 0; i < 1000; ++i) text += std::to_string(i) + "\n";
  text += "1000\n";
  const auto t = parse_mahimahi("m", text);
  EXPECT_NEAR(t.mbps_at(0.1, false), 12.0, 1e-9);
  // The closing stamp at 1000 ms is an opportunity too and lands in the last window.
  EXPECT_NEAR(t.mbps_at(0.6, false), 501 * 1500 * 8 / 0.5 / 1e6, 1e-9);
}

TEST(Mahimahi, Empty) { EXPECT_THROW(parse_mahimahi("m", ""), ValidationError); }

TEST(Mahimahi, UniformWithinTwoPercentProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int count = 200 + static_cast<int>(rng() % 5000);
    const int spacing = 1 + static_cast<int>(rng() % 20);
    std::string text;
    for (int i = 1; i <= count; ++i) text += std::to_string(i * spacing) + "\n";
    const auto t = parse_mahimahi("u", text);
    const double expected = count * 1500.0 * 8.0 / (count * spacing / 1000.0) / 1e6;
    EXPECT_NEAR(t.mean_mbps(), expected, 0.02 * expected) << count << " x " << spacing;
  }
}

TEST(Bucket, Classes) {
  EXPECT_EQ(bucket(parse_cooked("a", "0,1\n10,1\n")), Bucket::slow);
  EXPECT_EQ(bucket(parse_cooked("b", "0,2\n10,2\n")), Bucket::medium);
  EXPECT_EQ(bucket(parse_cooked("c", "0,10\n10,10\n")), Bucket::fast);
  EXPECT_EQ(bucket(parse_cooked("d", "0,1.5\n10,1.5\n")), Bucket::medium);
  EXPECT_EQ(bucket(parse_cooked("e", "0,4\n10,4\n")), Bucket::fast);
  // Time-weighted: 1 s at 10 Mbps and 9 s at 1 Mbps averages 1.9.
  EXPECT_EQ(bucket(parse_cooked("f", "0,10\n1,1\n10,1\n")), Bucket::medium);
  EXPECT_EQ(parse_bucket("slow"), Bucket::slow);
  EXPECT_EQ(parse_bucket("FAST"), Bucket::fast);
}

TEST(Bucket, RefinementInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double mbps = 0.1 + static_cast<double>(rng() % 1000) / 100.0;
    const int pieces = 2 + static_cast<int>(rng() % 50);
    std::string coarse = "0," + format_exact(mbps) + "\n100," + format_exact(mbps) + "\n";
    std::string fine;
    for (int i = 0; i <= pieces; ++i) fine += format_exact(100.0 * i / pieces) + "," + format_exact(mbps) + "\n";
    const auto a = parse_cooked("a", coarse);
    const auto b = parse_cooked("b", fine);
    EXPECT_NEAR(a.mean_mbps(), b.mean_mbps(), 1e-12);
    EXPECT_EQ(bucket(a), bucket(b));
  }
}

TEST(Split, StratifiedCounts) {
  std::vector<NetworkTrace> traces;
  for (int i = 0; i < 10; ++i) traces.push_back(synth_trace("s" + std::to_string(i), 1.0, 0.3, 200, i));
  for (int i = 0; i < 5; ++i) traces.push_back(synth_trace("m" + std::to_string(i), 2.5, 0.3, 200, 100 + i));
  const auto corpus = split_corpus(traces, 0.2, 42);
  EXPECT_EQ(corpus.select(Split::train, Bucket::slow).size(), 2u);
  EXPECT_EQ(corpus.select(Split::train, Bucket::medium).size(), 1u);
  EXPECT_EQ(corpus.select(Split::test).size(), 12u);

  const auto again = split_corpus(traces, 0.2, 42);
  EXPECT_EQ(again.split, corpus.split);

  const auto none = split_corpus(traces, 0.0, 42);
  EXPECT_TRUE(none.select(Split::train).empty());
}

TEST(Split, DuplicateIdsRejected) {
  std::vector<NetworkTrace> traces{synth_trace("x", 1, 0.1, 10, 1), synth_trace("x", 1, 0.1, 10, 2)};
  EXPECT_THROW(split_corpus(traces, 0.2, 1), ValidationError);
}

TEST(SynthTrace, HitsMeanExactly) {
  for (double mean : {0.7, 2.0, 6.0}) {
    const auto t = synth_trace("t", mean, 0.4, 300, 9);
    EXPECT_NEAR(t.mean_mbps(), mean, 1e-9);
    EXPECT_DOUBLE_EQ(t.duration(), 300.0);
  }
}

TEST(Manifest, RoundTripAndFilter) {
  const auto dir = std::filesystem::temp_directory_path() / "adachunk_manifest_test";
  std::filesystem::remove_all(dir);
  std::vector<NetworkTrace> traces;
  for (int i = 0; i < 6; ++i) traces.push_back(synth_trace("t" + std::to_string(i), 1.0 + i, 0.3, i < 5 ? 200 : 60, i));
  const auto corpus = split_corpus(traces, 0.2, 7);
  save_manifest(corpus, dir / "manifest.json", dir / "traces");
  const auto back = load_manifest(dir / "manifest.json", 120.0);
  EXPECT_EQ(back.traces.size(), 5u);  // the 60 s trace is filtered
  for (const auto& t : back.traces) {
    EXPECT_EQ(back.split.at(t.id()), corpus.split.at(t.id()));
    EXPECT_EQ(bucket(t), bucket(*std::find_if(corpus.traces.begin(), corpus.traces.end(),
                                               [&](const NetworkTrace& x) { return x.id() == t.id(); })));
  }
  std::filesystem::remove_all(dir);
}
