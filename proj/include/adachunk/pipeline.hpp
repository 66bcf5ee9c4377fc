#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adachunk/abr.hpp"
#include "adachunk/augmenter.hpp"
#include "adachunk/qoe_weights.hpp"
#include "adachunk/search.hpp"
#include "adachunk/segmenter.hpp"
#include "adachunk/simulator.hpp"
#include "adachunk/trace.hpp"

namespace adachunk {

// Experiment file, schema "experiment/1":
// {
//   "schema": "experiment/1",
//   "videos": ["a.json", ...],             paths relative to the experiment file
//   "traces": "traces/manifest.json",
//   "segmentations": ["constant", "wide_eye"],
//   "augmentations": ["none", "sigma_bv"],
//   "abrs": ["bb", "rmpc-a"],
//   "buckets": ["slow", "medium", "fast"],
//   "weights": {"lambda_per_s": 0.25, "beta": 100, "gamma": 1},
//   "split": {"train_fraction": 0.2, "seed": 0},   used when the manifest has no labels
//   "min_trace_duration": 120,
//   "aggregate": "mean",
//   "decision_model": "uhd4k",
//   "evaluation_models": {"slow": "mobile", "medium": "hdtv", "fast": "uhd4k"},
//   "sim": {"rtt": 0.08, "max_buffer": 60, "startup_buffer": 10,
//           "rtt_in_throughput_sample": true, "trace_looping": true},
//   "segmenter": {"k": 5, "commit_window": 1, "wide_eye_k": 10, "wide_eye_commit_window": 5,
//                 "filter_width": 32, "target_len": 5, "penalty_rate": 0.2,
//                 "symmetric_bytes": false},
//   "augmenter": {"vmaf_drop_threshold": 8, "bitrate_excess": 10, "vmaf_gap": 10,
//                 "lookahead_segments": 5},
//   "rmpc": {"horizon": 5},
//   "output": "out",
//   "threads": 0
// }
// Every field except videos, traces and the strategy lists is optional.
struct ExperimentSpec {
  std::vector<std::filesystem::path> videos;
  std::filesystem::path traces;
  std::vector<SegStrategy> segmentations;
  std::vector<std::optional<AugStrategy>> augmentations;  // nullopt: no augmentation
  std::vector<std::string> abrs;
  std::vector<Bucket> buckets{Bucket::slow, Bucket::medium, Bucket::fast};
  QoeWeights weights;
  double train_fraction = 0.2;
  std::uint64_t split_seed = 0;
  double min_trace_duration = 120.0;
  Aggregate aggregate;
  VmafModel decision_model = VmafModel::uhd4k;
  std::map<Bucket, VmafModel> evaluation_models{{Bucket::slow, VmafModel::mobile},
                                                {Bucket::medium, VmafModel::hdtv},
                                                {Bucket::fast, VmafModel::uhd4k}};
  SimConfig sim;
  SegConfig segmenter;  // k and commit_window for non-WideEye strategies
  int wide_eye_k = 10;
  int wide_eye_commit_window = 5;
  AugConfig augmenter;
  AbrSettings abr;
  std::filesystem::path output = "out";
  int threads = 0;

  SegConfig seg_config(SegStrategy s) const;
};

ExperimentSpec experiment_from_json(std::string_view text, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment(const std::filesystem::path& path);
void validate(const ExperimentSpec& spec);

std::string aug_label(const std::optional<AugStrategy>& a);

struct PipelineResult {
  std::size_t cells = 0;
  std::vector<std::string> failures;  // one message per failed cell
};

// Writes <output>/runs.csv, <output>/report.csv, <output>/chunkings/*.json and
// <output>/logs/*.jsonl. Only test-split traces are simulated for reports.
PipelineResult run_pipeline(const ExperimentSpec& spec);

// Delta table (B - A) between two report.csv files over identical cells.
std::string compare_reports(std::string_view report_a, std::string_view report_b);

extern const std::vector<std::string> kReportHeader;
extern const std::vector<std::string> kRunsHeader;

}  // namespace adachunk
