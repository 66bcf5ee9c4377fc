#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/media.hpp"
#include "adachunk/synth.hpp"
#include "support.hpp"

using namespace adachunk;
using adachunk::testing::make_video;

namespace {

std::string minimal_json(double track1_kbps = 800.0, bool drop_track = false) {
  std::string frags;
  for (int f = 0; f < 8; ++f) {
    std::string tracks = R"({"bytes": 1000, "vmaf": {"mobile": [50, 50], "hdtv": [40, 40], "uhd4k": [30, 30]}})";
    if (!(drop_track && f == 7)) {
      tracks += R"(, {"bytes": 2000, "vmaf": {"mobile": [60, 60], "hdtv": [50, 50], "uhd4k": [40, 40]}})";
    }
    frags += std::string(f ? "," : "") + R"({"duration_s": 2, "tracks": [)" + tracks + "]}";
  }
  return R"({"schema": "video-meta/1", "video_id": "v", "fps": 24, "ladder": [{"id": 0, "kbps": 400, "label": "a"}, {"id": 1, "kbps": )" +
         std::to_string(track1_kbps) + R"(, "label": "b"}], "fragments": [)" + frags + "]}";
}

}  // namespace

TEST(Media, MinimalSingleTrackFragment) {
  const auto v = video_from_json(
      R"({"schema": "video-meta/1", "video_id": "m", "fps": 30, "ladder": [{"id": 0, "kbps": 300, "label": "240p"}],
          "fragments": [{"duration_s": 2, "tracks": [{"bytes": 5000, "vmaf": {"mobile": [70, 71], "hdtv": [60, 61], "uhd4k": [50, 51]}}]}]})");
  EXPECT_DOUBLE_EQ(v.total_duration(), 2.0);
  EXPECT_EQ(v.fragment_count(), 1u);
}

TEST(Media, LadderNotIncreasingRejected) {
  try {
    video_from_json(minimal_json(300.0));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ladder not increasing"), std::string::npos);
  }
}

TEST(Media, MissingTrackEntryNamesFragment) {
  try {
    video_from_json(minimal_json(800.0, true));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("fragment 7"), std::string::npos) << e.what();
  }
}

TEST(Media, MalformedJsonIsValidationError) {
  EXPECT_THROW(video_from_json("{not json"), ValidationError);
}

TEST(Media, SegmentStatsBitrate) {
  const auto v = make_video({4.0}, {500.0}, [](int, int) { return 1'000'000; },
                            [](int, int, int) { return 70.0; });
  EXPECT_DOUBLE_EQ(segment_stats(v, {0, 0}, 0).kbps, 2000.0);
}

TEST(Media, SegmentStatsConstantVmaf) {
  const auto v = make_video({2.0, 3.0}, {500.0}, [](int, int) { return 1000; },
                            [](int, int, int) { return 80.0; });
  EXPECT_DOUBLE_EQ(segment_stats(v, {0, 1}, 0).vmaf(VmafModel::hdtv), 80.0);
}

TEST(Media, SegmentStatsDurationWeightedVmaf) {
  const auto v = make_video({1.0, 3.0}, {500.0}, [](int, int) { return 1000; },
                            [](int f, int, int) { return f == 0 ? 60.0 : 100.0; });
  EXPECT_DOUBLE_EQ(segment_stats(v, {0, 1}, 0).vmaf(VmafModel::uhd4k), 90.0);
}

TEST(Media, PartialSecondSamplesWeighted) {
  // 1.5 s fragment: samples cover [0,1) and [1,1.5).
  const auto v = make_video({1.5}, {500.0}, [](int, int) { return 1000; },
                            [](int, int, int k) { return k == 0 ? 60.0 : 90.0; });
  EXPECT_NEAR(segment_stats(v, {0, 0}, 0).vmaf(VmafModel::mobile), (60.0 + 0.5 * 90.0) / 1.5, 1e-12);
}

TEST(Media, PartitionPropertyRandomMerges) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    Segmentation segs;
    int start = 0;
    for (int f = 1; f < n; ++f) {
      if (rng() % 2) {
        segs.push_back({start, f - 1});
        start = f;
      }
    }
    segs.push_back({start, n - 1});
    EXPECT_NO_THROW(validate_partition(segs, static_cast<std::size_t>(n)));
    int next = 0;
    for (const auto& s : segs) {
      EXPECT_EQ(s.first, next);
      next = s.last + 1;
    }
    EXPECT_EQ(next, n);
  }
  EXPECT_THROW(validate_partition({{0, 1}, {3, 4}}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{0, 2}, {2, 4}}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{0, 3}}, 5), ValidationError);
}

TEST(Media, SegmentAdditivity) {
  SynthProfile p;
  p.duration = 30;
  p.keyframe_min = 0.7;
  p.keyframe_max = 2.3;
  const auto v = synth_video(p, small_ladder(), 11);
  const Segment s{3, 9};
  for (int j = 0; j < static_cast<int>(v.track_count()); ++j) {
    std::int64_t bytes = 0;
    double dur = 0.0;
    for (int f = s.first; f <= s.last; ++f) {
      bytes += v.fragments[f].tracks[j].bytes;
      dur += v.fragments[f].duration;
    }
    EXPECT_EQ(segment_bytes(v, s, j), bytes);
    EXPECT_NEAR(segment_duration(v, s), dur, 1e-9);
  }
}

TEST(Media, JsonRoundTripBitExact) {
  SynthProfile p;
  p.duration = 20;
  p.keyframe_min = 0.5;
  p.keyframe_max = 3.0;
  const auto v = synth_video(p, full_ladder(), 5);
  const auto text = video_to_json(v);
  const auto back = video_from_json(text);
  EXPECT_EQ(back, v);
  EXPECT_EQ(video_to_json(back), text);

  const auto dir = std::filesystem::temp_directory_path() / "adachunk_media_test";
  save_video(v, dir / "v.json");
  EXPECT_EQ(load_video(dir / "v.json"), v);
  std::filesystem::remove_all(dir);
}

TEST(Media, ChunkingRoundTripAndValidation) {
  const auto v = make_video({2.0, 2.0}, {500.0, 1000.0},
                            [](int, int j) { return adachunk::testing::bytes_at(j ? 1000.0 : 500.0, 2.0); },
                            [](int, int j, int) { return j ? 80.0 : 60.0; });
  Augmentation a;
  a.segment = 0;
  a.kbps = 700.0;
  a.bytes = 350000;
  a.between = {0, 1};
  for (VmafModel m : kVmafModels) a.vmaf[m] = {70.0, 70.0, 70.0, 70.0};
  Chunking c{{{0, 1}}, {a}};
  EXPECT_NO_THROW(validate(c, v));
  EXPECT_EQ(chunking_from_json(chunking_to_json(c)), c);

  auto dup = c;
  dup.augmentations.push_back(a);
  EXPECT_THROW(validate(dup, v), ValidationError);
  auto outside = c;
  outside.augmentations[0].kbps = 1000.0;
  EXPECT_THROW(validate(outside, v), ValidationError);
  auto bad_seg = c;
  bad_seg.augmentations[0].segment = 1;
  EXPECT_THROW(validate(bad_seg, v), ValidationError);
}

TEST(Synth, Deterministic) {
  SynthProfile p;
  p.keyframe_min = 0.5;
  p.keyframe_max = 4.0;
  EXPECT_EQ(video_to_json(synth_video(p, small_ladder(), 3)), video_to_json(synth_video(p, small_ladder(), 3)));
}

TEST(Synth, FixedIntervalCount) {
  SynthProfile p;
  p.duration = 60;
  p.keyframe_min = p.keyframe_max = 1.0;
  const auto v = synth_video(p, small_ladder(), 1);
  ASSERT_EQ(v.fragment_count(), 60u);
  for (const auto& f : v.fragments) EXPECT_DOUBLE_EQ(f.duration, 1.0);
}

TEST(Synth, ComplexityStepRaisesBytes) {
  SynthProfile p;
  p.duration = 60;
  p.complexity = {{0.0, 0.2}, {30.0, 0.9}};
  const auto v = synth_video(p, full_ladder(), 9);
  for (std::size_t j = 0; j < v.track_count(); ++j) {
    double lo = 0, hi = 0;
    for (std::size_t f = 0; f < 30; ++f) lo += static_cast<double>(v.fragments[f].tracks[j].bytes);
    for (std::size_t f = 30; f < 60; ++f) hi += static_cast<double>(v.fragments[f].tracks[j].bytes);
    EXPECT_GT(hi / 30, lo / 30) << "track " << j;
  }
}

TEST(Synth, BitrateCapAndVmafOrdering) {
  SynthProfile p;
  p.duration = 40;
  p.complexity = {{0.0, 1.0}};
  p.bitrate_noise = 0.3;
  const auto v = synth_video(p, full_ladder(), 4);
  for (const auto& f : v.fragments) {
    for (std::size_t j = 0; j < v.track_count(); ++j) {
      // Half a byte of rounding on top of the cap.
      EXPECT_LE(kbps_of(f.tracks[j].bytes, f.duration), 1.75 * v.ladder[j].kbps + kbps_of(1, f.duration) / 2 + 1e-9);
      if (j > 0) {
        for (VmafModel m : kVmafModels) EXPECT_GE(f.tracks[j].vmaf[m][0], f.tracks[j - 1].vmaf[m][0]);
      }
    }
  }
}

TEST(Synth, Errors) {
  SynthProfile p;
  EXPECT_THROW(synth_video(p, {}, 1), ValidationError);
  p.duration = 0;
  EXPECT_THROW(synth_video(p, small_ladder(), 1), ValidationError);
}

TEST(Io, CsvRoundTrip) {
  const std::vector<std::string> row{"a", "b,c", "say \"hi\"", ""};
  const auto rows = parse_csv(csv_row(row) + csv_row({"x", "y", "z", "w"}));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], row);
}

TEST(Io, FormatExactRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 12345.678901234, 1e-7}) {
    EXPECT_EQ(std::stod(format_exact(x)), x);
  }
  EXPECT_EQ(format_fixed(-0.0000001, 3), "0.000");
}
