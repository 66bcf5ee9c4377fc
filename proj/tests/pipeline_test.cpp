#include <gtest/gtest.h>

#include <filesystem>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/pipeline.hpp"
#include "adachunk/synth.hpp"

using namespace adachunk;
namespace fs = std::filesystem;

namespace {

fs::path fixture_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("adachunk_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir / "traces");
  SynthProfile p;
  p.duration = 40;
  p.keyframe_min = 0.8;
  p.keyframe_max = 2.5;
  p.complexity = {{0, 0.3}, {15, 0.9}, {25, 0.4}};
  save_video(synth_video(p, small_ladder(), 21), dir / "v.json");

  std::vector<NetworkTrace> traces;
  for (int i = 0; i < 5; ++i) traces.push_back(synth_trace("s" + std::to_string(i), 1.0, 0.4, 150, 100 + i));
  for (int i = 0; i < 5; ++i) traces.push_back(synth_trace("m" + std::to_string(i), 2.5, 0.4, 150, 200 + i));
  save_manifest(split_corpus(std::move(traces), 0.4, 3), dir / "traces" / "manifest.json", dir / "traces");

  write_text_file(dir / "exp.json", R"({
    "schema": "experiment/1",
    "videos": ["v.json"],
    "traces": "traces/manifest.json",
    "segmentations": ["constant", "per_fragment", "time_bytes", "wide_eye"],
    "augmentations": ["none", "lambda_bv", "sigma_bv"],
    "abrs": ["bb", "rmpc-a"],
    "buckets": ["slow", "medium"],
    "output": "out",
    "threads": 2
  })");
  return dir;
}

std::vector<std::vector<std::string>> rows_of(const fs::path& p) { return parse_csv(read_text_file(p)); }

std::size_t col(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("no column " + name);
}

}  // namespace

TEST(Pipeline, ReportsAreDeterministicAndConsistent) {
  const auto dir = fixture_dir("det");
  auto spec = load_experiment(dir / "exp.json");
  const auto r1 = run_pipeline(spec);
  EXPECT_TRUE(r1.failures.empty());
  const auto report1 = read_text_file(dir / "out" / "report.csv");
  const auto runs1 = read_text_file(dir / "out" / "runs.csv");
  spec.threads = 1;
  run_pipeline(spec);
  EXPECT_EQ(read_text_file(dir / "out" / "report.csv"), report1);
  EXPECT_EQ(read_text_file(dir / "out" / "runs.csv"), runs1);

  const auto report = parse_csv(report1);
  ASSERT_EQ(report[0], kReportHeader);
  // 4 segmentations x 3 augmentations x 2 abrs x 2 buckets.
  EXPECT_EQ(report.size(), 1u + 48u);
  for (std::size_t r = 1; r < report.size(); ++r) {
    const auto& row = report[r];
    EXPECT_EQ(row[col(report[0], "status")], "ok");
    if (row[1] == "constant" && row[2] == "none") {
      EXPECT_DOUBLE_EQ(std::stod(row[col(report[0], "improvement_mean")]), 0.0);
      EXPECT_DOUBLE_EQ(std::stod(row[col(report[0], "fluctuation")]), 1.0);
    }
    if (row[2] == "none") EXPECT_DOUBLE_EQ(std::stod(row[col(report[0], "byte_overhead")]), 0.0);
  }

  const auto runs = parse_csv(runs1);
  ASSERT_EQ(runs[0], kRunsHeader);
  for (std::size_t r = 1; r < runs.size(); ++r) EXPECT_EQ(runs[r][col(runs[0], "split")], "test");
  EXPECT_TRUE(fs::exists(dir / "out" / "chunkings"));
  EXPECT_TRUE(fs::exists(dir / "out" / "logs"));

  const auto self = parse_csv(compare_reports(report1, report1));
  for (std::size_t r = 1; r < self.size(); ++r) {
    for (std::size_t c = 5; c < self[r].size(); ++c) {
      if (!self[r][c].empty()) EXPECT_DOUBLE_EQ(std::stod(self[r][c]), 0.0);
    }
  }
  fs::remove_all(dir);
}

TEST(Compare, DeltaAndMissingCell) {
  auto row = [](const std::string& seg, const std::string& rebuf) {
    return csv_row({"v", seg, "none", "bb", "SLOW", "mobile", "ok", "4", "1.0", "0.5", "2.0", rebuf, "1.0", "70.0",
                    "0.0", "10.0"});
  };
  const std::string a = csv_row(kReportHeader) + row("constant", "2.0") + row("wide_eye", "2.0");
  const std::string b = csv_row(kReportHeader) + row("constant", "1.3") + row("wide_eye", "2.0");
  const auto d = parse_csv(compare_reports(a, b));
  const auto c = col(d[0], "delta_rebuffer_ratio");
  EXPECT_NEAR(std::stod(d[1][c]), -0.7, 1e-9);
  EXPECT_NEAR(std::stod(d[2][c]), 0.0, 1e-12);

  const std::string partial = csv_row(kReportHeader) + row("constant", "1.3");
  try {
    compare_reports(a, partial);
    FAIL() << "expected a missing-cell error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("missing from report B"), std::string::npos);
  }
  EXPECT_THROW(compare_reports("x,y\n", a), ValidationError);
}

TEST(Experiment, Validation) {
  const auto dir = fixture_dir("val");
  EXPECT_THROW(experiment_from_json(R"({"schema": "experiment/2"})", dir), ValidationError);
  EXPECT_THROW(experiment_from_json(R"({"schema": "experiment/1", "videos": ["v.json"], "traces": "traces/manifest.json",
      "segmentations": ["bogus"], "augmentations": ["none"], "abrs": ["bb"]})",
                                    dir),
               ValidationError);
  const auto spec = experiment_from_json(R"({"schema": "experiment/1", "videos": ["v.json"],
      "traces": "traces/manifest.json", "segmentations": ["wide_eye"], "augmentations": ["none"], "abrs": ["bb"]})",
                                         dir);
  EXPECT_EQ(spec.seg_config(SegStrategy::wide_eye).k, 10);
  EXPECT_EQ(spec.seg_config(SegStrategy::sim).k, 5);
  fs::remove_all(dir);
}
