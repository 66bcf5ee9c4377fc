#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adachunk/abr.hpp"
#include "adachunk/augmenter.hpp"
#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/media.hpp"
#include "adachunk/pipeline.hpp"
#include "adachunk/qoe.hpp"
#include "adachunk/segmenter.hpp"
#include "adachunk/simulator.hpp"
#include "adachunk/synth.hpp"
#include "adachunk/trace.hpp"

namespace fs = std::filesystem;
using namespace adachunk;

namespace {

struct SimFlags {
  SimConfig cfg;
  bool no_loop = false;
  bool exclude_rtt = false;

  void add(CLI::App* app) {
    app->add_option("--rtt", cfg.rtt, "Round-trip time per request (s)")->capture_default_str();
    app->add_option("--max-buffer", cfg.max_buffer, "Player buffer capacity (s)")->capture_default_str();
    app->add_option("--startup-buffer", cfg.startup_buffer, "Buffer needed to start playback (s)")
        ->capture_default_str();
    app->add_flag("--no-loop", no_loop, "Hold the last trace sample instead of looping");
    app->add_flag("--exclude-rtt", exclude_rtt, "Leave the RTT out of throughput samples");
  }
  SimConfig get() const {
    SimConfig c = cfg;
    c.trace_looping = !no_loop;
    c.rtt_in_throughput_sample = !exclude_rtt;
    return c;
  }
};

struct TrainingFlags {
  std::string abr = "bb";
  std::string traces;
  std::string aggregate = "mean";
  double train_fraction = 0.2;
  std::uint64_t seed = 0;
  double min_duration = 120.0;
  std::size_t horizon = 5;
  QoeWeights weights;
  std::string decision_model = "uhd4k";
  SimFlags sim;

  void add(CLI::App* app) {
    app->add_option("--abr", abr, "ABR used in simulations: rb|bb|rmpc-o|rmpc-a")->capture_default_str();
    app->add_option("--traces", traces, "Trace manifest; its train split drives simulations");
    app->add_option("--aggregate", aggregate, "mean or p<percentile>")->capture_default_str();
    app->add_option("--train-fraction", train_fraction, "Used when the manifest has no split")
        ->capture_default_str();
    app->add_option("--split-seed", seed, "Used when the manifest has no split")->capture_default_str();
    app->add_option("--min-trace-duration", min_duration, "Drop shorter traces (s)")->capture_default_str();
    app->add_option("--horizon", horizon, "RMPC horizon")->capture_default_str();
    app->add_option("--lambda", weights.lambda_per_s, "Quality weight per second")->capture_default_str();
    app->add_option("--beta", weights.beta, "Rebuffer weight")->capture_default_str();
    app->add_option("--gamma", weights.gamma, "Switching weight")->capture_default_str();
    app->add_option("--decision-model", decision_model, "VMAF model for decisions")->capture_default_str();
    sim.add(app);
  }
};

// Owns what a SimDeps points at.
struct Training {
  TraceCorpus corpus;
  std::unique_ptr<AbrPolicy> policy;
  SimDeps deps;

  explicit Training(const TrainingFlags& f) {
    AbrSettings s;
    s.mpc.horizon = f.horizon;
    s.mpc.weights = f.weights;
    s.mpc.decision_model = parse_vmaf_model(f.decision_model);
    s.bb.max_buffer = f.sim.get().max_buffer;
    policy = make_policy(f.abr, s);
    deps.abr = policy.get();
    deps.sim = f.sim.get();
    deps.weights = f.weights;
    deps.decision_model = s.mpc.decision_model;
    deps.aggregate = Aggregate::parse(f.aggregate);
    if (!f.traces.empty()) {
      corpus = load_manifest(f.traces, f.min_duration, f.train_fraction, f.seed);
      deps.traces = corpus.select(Split::train);
    }
  }
};

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  write_text_file(path, s);
}

NetworkTrace load_trace(const std::string& path, const std::string& format) {
  if (format == "cooked") return load_cooked(path);
  if (format == "mahimahi") return load_mahimahi(path);
  throw ValidationError("unknown trace format " + format + " (expected cooked|mahimahi)");
}

std::vector<ComplexityPoint> parse_complexity(const std::string& spec) {
  std::vector<ComplexityPoint> out;
  if (spec.empty()) return out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto end = std::min(spec.find(',', pos), spec.size());
    const auto item = spec.substr(pos, end - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("complexity must be t:c[,t:c...]");
    try {
      out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ValidationError("complexity must be t:c[,t:c...]");
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-length segmentation and augmentation for adaptive video streaming"};
  app.require_subcommand(1);

  // segment
  auto* seg_cmd = app.add_subcommand("segment", "Segment a video (or validate metadata)");
  std::string seg_video, seg_out, seg_log, seg_strategy = "constant", seg_chunking;
  bool validate_only = false;
  SegConfig seg_cfg;
  std::optional<int> seg_k, seg_commit;
  std::optional<double> seg_byte_target;
  TrainingFlags seg_train;
  seg_cmd->add_option("--video", seg_video, "Video metadata JSON")->required();
  seg_cmd->add_option("--strategy", seg_strategy,
                      "constant|per_fragment|time|bytes|time_bytes|sim|wide_eye")
      ->capture_default_str();
  seg_cmd->add_option("--out", seg_out, "Chunking JSON to write");
  seg_cmd->add_option("--log", seg_log, "Decision log (JSON Lines)");
  seg_cmd->add_flag("--validate-only", validate_only, "Only validate the metadata (and --chunking)");
  seg_cmd->add_option("--chunking", seg_chunking, "Chunking to validate with --validate-only");
  seg_cmd->add_option("--k", seg_k, "Lookahead in fragments (default 5; wide_eye 10)");
  seg_cmd->add_option("--commit-window", seg_commit, "Decisions frozen per step (default 1; wide_eye 5)");
  seg_cmd->add_option("--target-len", seg_cfg.target_len, "Target segment length (s)")->capture_default_str();
  seg_cmd->add_option("--penalty-rate", seg_cfg.penalty_rate, "Penalty per second / per excess ratio")
      ->capture_default_str();
  seg_cmd->add_option("--byte-target", seg_byte_target, "Byte target (default: 5 s of the top track)");
  seg_cmd->add_option("--filter-width", seg_cfg.filter_width, "WideEye candidates kept")->capture_default_str();
  seg_cmd->add_flag("--symmetric-bytes", seg_cfg.symmetric_bytes, "Penalize byte shortfall too");
  seg_train.add(seg_cmd);

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Add augmentations to a segmentation");
  std::string aug_video, aug_in, aug_out, aug_log, aug_strategy = "lambda_bv";
  AugConfig aug_cfg;
  TrainingFlags aug_train;
  aug_cmd->add_option("--video", aug_video, "Video metadata JSON")->required();
  aug_cmd->add_option("--chunking", aug_in, "Input chunking (its segmentation is used)")->required();
  aug_cmd->add_option("--out", aug_out, "Chunking JSON to write")->required();
  aug_cmd->add_option("--log", aug_log, "sigma_bv decision log (JSON Lines)");
  aug_cmd->add_option("--strategy", aug_strategy, "lambda_v|lambda_b|lambda_bv|sigma_bv")->capture_default_str();
  aug_cmd->add_option("--vmaf-drop", aug_cfg.vmaf_drop_threshold, "lambda_v threshold (points)")
      ->capture_default_str();
  aug_cmd->add_option("--bitrate-excess", aug_cfg.bitrate_excess, "B threshold (percent)")->capture_default_str();
  aug_cmd->add_option("--vmaf-gap", aug_cfg.vmaf_gap, "V threshold (points)")->capture_default_str();
  aug_cmd->add_option("--lookahead-segments", aug_cfg.lookahead_segments, "sigma_bv window")
      ->capture_default_str();
  aug_train.add(aug_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Play a chunking over one trace");
  std::string sim_video, sim_chunking, sim_trace, sim_format = "cooked", sim_abr = "bb", sim_out,
                                                  sim_model = "uhd4k";
  SimFlags sim_flags;
  QoeWeights sim_weights;
  std::size_t sim_horizon = 5;
  sim_cmd->add_option("--video", sim_video, "Video metadata JSON")->required();
  sim_cmd->add_option("--chunking", sim_chunking, "Chunking JSON")->required();
  sim_cmd->add_option("--trace", sim_trace, "Trace file")->required();
  sim_cmd->add_option("--format", sim_format, "cooked|mahimahi")->capture_default_str();
  sim_cmd->add_option("--abr", sim_abr, "rb|bb|rmpc-o|rmpc-a")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "Outcome JSON to write");
  sim_cmd->add_option("--model", sim_model, "VMAF model for the QoE summary")->capture_default_str();
  sim_cmd->add_option("--horizon", sim_horizon, "RMPC horizon")->capture_default_str();
  sim_cmd->add_option("--lambda", sim_weights.lambda_per_s, "Quality weight per second")->capture_default_str();
  sim_cmd->add_option("--beta", sim_weights.beta, "Rebuffer weight")->capture_default_str();
  sim_cmd->add_option("--gamma", sim_weights.gamma, "Switching weight")->capture_default_str();
  sim_flags.add(sim_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Run an experiment matrix");
  std::string eval_config, eval_output;
  std::optional<int> eval_threads;
  eval_cmd->add_option("--config", eval_config, "Experiment JSON (schema experiment/1)")->required();
  eval_cmd->add_option("--output", eval_output, "Override the output directory");
  eval_cmd->add_option("--threads", eval_threads, "Worker threads (default: all cores)");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Delta table between two reports (B - A)");
  std::string cmp_a, cmp_b, cmp_out;
  cmp_cmd->add_option("report_a", cmp_a, "Baseline report.csv")->required();
  cmp_cmd->add_option("report_b", cmp_b, "Candidate report.csv")->required();
  cmp_cmd->add_option("--out", cmp_out, "Write the table here instead of stdout");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic fixtures");
  synth_cmd->require_subcommand(1);
  auto* sv_cmd = synth_cmd->add_subcommand("video", "Synthetic video metadata");
  SynthProfile profile;
  std::string sv_out, sv_complexity, sv_ladder = "small";
  std::uint64_t sv_seed = 1;
  sv_cmd->add_option("--out", sv_out, "Video JSON to write")->required();
  sv_cmd->add_option("--id", profile.video_id, "Video id")->capture_default_str();
  sv_cmd->add_option("--seed", sv_seed, "Random seed")->capture_default_str();
  sv_cmd->add_option("--duration", profile.duration, "Seconds")->capture_default_str();
  sv_cmd->add_option("--fps", profile.fps, "Frames per second")->capture_default_str();
  sv_cmd->add_option("--keyframe-min", profile.keyframe_min, "Shortest keyframe interval (s)")
      ->capture_default_str();
  sv_cmd->add_option("--keyframe-max", profile.keyframe_max, "Longest keyframe interval (s)")
      ->capture_default_str();
  sv_cmd->add_option("--complexity", sv_complexity, "Step profile t:c[,t:c...], c in [0,1]");
  sv_cmd->add_option("--bitrate-noise", profile.bitrate_noise, "Relative")->capture_default_str();
  sv_cmd->add_option("--vmaf-noise", profile.vmaf_noise, "Points")->capture_default_str();
  sv_cmd->add_option("--ladder", sv_ladder, "small|full")->capture_default_str();

  auto* st_cmd = synth_cmd->add_subcommand("traces", "Synthetic cooked traces plus a manifest");
  std::string st_out;
  int st_count = 10;
  double st_mean = 1.0, st_var = 0.3, st_duration = 300.0, st_fraction = 0.2;
  std::uint64_t st_seed = 1;
  std::string st_prefix = "trace";
  st_cmd->add_option("--out-dir", st_out, "Directory for traces and manifest.json")->required();
  st_cmd->add_option("--count", st_count, "Number of traces")->capture_default_str();
  st_cmd->add_option("--mean", st_mean, "Mean Mbps")->capture_default_str();
  st_cmd->add_option("--variability", st_var, "Log-scale volatility")->capture_default_str();
  st_cmd->add_option("--duration", st_duration, "Seconds")->capture_default_str();
  st_cmd->add_option("--train-fraction", st_fraction, "Per-bucket train share")->capture_default_str();
  st_cmd->add_option("--seed", st_seed, "Random seed")->capture_default_str();
  st_cmd->add_option("--prefix", st_prefix, "Trace id prefix")->capture_default_str();

  // bucket
  auto* bucket_cmd = app.add_subcommand("bucket", "Mean throughput and bucket per trace");
  std::vector<std::string> bucket_files;
  std::string bucket_format = "cooked";
  bucket_cmd->add_option("traces", bucket_files, "Trace files")->required();
  bucket_cmd->add_option("--format", bucket_format, "cooked|mahimahi")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*seg_cmd) {
      const auto video = load_video(seg_video);
      if (validate_only) {
        if (!seg_chunking.empty()) validate(load_chunking(seg_chunking), video);
        std::cout << "ok: " << video.video_id << ", " << video.fragment_count() << " fragments, "
                  << video.track_count() << " tracks\n";
        return 0;
      }
      if (seg_out.empty()) throw ValidationError("--out is required unless --validate-only");
      const auto strategy = parse_seg_strategy(seg_strategy);
      auto cfg = SegConfig::defaults(strategy);
      cfg.target_len = seg_cfg.target_len;
      cfg.penalty_rate = seg_cfg.penalty_rate;
      cfg.filter_width = seg_cfg.filter_width;
      cfg.symmetric_bytes = seg_cfg.symmetric_bytes;
      cfg.byte_target = seg_byte_target;
      cfg.aggregate = Aggregate::parse(seg_train.aggregate);
      if (seg_k) cfg.k = *seg_k;
      if (seg_commit) cfg.commit_window = *seg_commit;
      Training training(seg_train);
      auto res = segment(video, cfg, &training.deps);
      save_chunking(Chunking{res.segments, {}}, seg_out);
      if (!seg_log.empty()) write_lines(seg_log, res.log);
      std::cout << res.segments.size() << " segments\n";
    } else if (*aug_cmd) {
      const auto video = load_video(aug_video);
      const auto in = load_chunking(aug_in);
      aug_cfg.strategy = parse_aug_strategy(aug_strategy);
      aug_cfg.decision_model = parse_vmaf_model(aug_train.decision_model);
      Training training(aug_train);
      auto res = augment(video, in.segments, aug_cfg, &training.deps);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      const Chunking out{in.segments, res.augmentations};
      save_chunking(out, aug_out);
      if (!aug_log.empty()) write_lines(aug_log, res.log);
      std::cout << res.augmentations.size() << " augmentations, byte overhead "
                << format_fixed(byte_overhead(out, video), 3) << "%\n";
    } else if (*sim_cmd) {
      const auto video = load_video(sim_video);
      const auto chunking = load_chunking(sim_chunking);
      const auto trace = load_trace(sim_trace, sim_format);
      AbrSettings s;
      s.mpc.horizon = sim_horizon;
      s.mpc.weights = sim_weights;
      s.bb.max_buffer = sim_flags.get().max_buffer;
      const auto policy = make_policy(sim_abr, s);
      const auto outcome = simulate(video, chunking, *policy, trace, sim_flags.get());
      if (!sim_out.empty()) write_text_file(sim_out, outcome_to_json(outcome));
      const auto q = qoe(outcome, sim_weights, parse_vmaf_model(sim_model));
      std::cout << "qoe " << format_fixed(q.total, 3) << "\nstartup_delay "
                << format_fixed(outcome.startup_delay, 3) << "\nrebuffer_s "
                << format_fixed(q.rebuffer_s, 3) << "\nrebuffer_ratio "
                << format_fixed(q.rebuffer_ratio, 3) << "\nmean_vmaf " << format_fixed(q.mean_vmaf, 3)
                << "\n";
    } else if (*eval_cmd) {
      auto spec = load_experiment(eval_config);
      if (!eval_output.empty()) spec.output = eval_output;
      if (eval_threads) spec.threads = *eval_threads;
      const auto res = run_pipeline(spec);
      for (const auto& f : res.failures) std::cerr << "failed: " << f << "\n";
      std::cout << res.cells << " cells, " << res.failures.size() << " failed; report in "
                << (spec.output / "report.csv").string() << "\n";
      return res.failures.empty() ? 0 : 2;
    } else if (*cmp_cmd) {
      const auto table = compare_reports(read_text_file(cmp_a), read_text_file(cmp_b));
      if (cmp_out.empty()) {
        std::cout << table;
      } else {
        write_text_file(cmp_out, table);
      }
    } else if (*sv_cmd) {
      profile.complexity = parse_complexity(sv_complexity);
      std::vector<Track> ladder;
      if (sv_ladder == "small") {
        ladder = small_ladder();
      } else if (sv_ladder == "full") {
        ladder = full_ladder();
      } else {
        throw ValidationError("ladder must be small|full");
      }
      save_video(synth_video(profile, ladder, sv_seed), sv_out);
    } else if (*st_cmd) {
      if (st_count < 1) throw ValidationError("--count must be >= 1");
      std::vector<NetworkTrace> traces;
      for (int i = 0; i < st_count; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_%03d", st_prefix.c_str(), i);
        traces.push_back(synth_trace(id, st_mean, st_var, st_duration, st_seed + static_cast<std::uint64_t>(i)));
      }
      const auto corpus = split_corpus(std::move(traces), st_fraction, st_seed);
      const fs::path dir(st_out);
      save_manifest(corpus, dir / "manifest.json", dir);
      std::cout << corpus.traces.size() << " traces in " << (dir / "manifest.json").string() << "\n";
    } else if (*bucket_cmd) {
      std::cout << "trace,mean_mbps,duration_s,bucket\n";
      for (const auto& f : bucket_files) {
        const auto t = load_trace(f, bucket_format);
        std::cout << csv_row({t.id(), format_fixed(t.mean_mbps(), 6), format_fixed(t.duration(), 3),
                              std::string(to_string(bucket(t)))});
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
