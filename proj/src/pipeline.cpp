#include "adachunk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <json.hpp>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/parallel.hpp"
#include "adachunk/qoe.hpp"
#include "adachunk/stats.hpp"

namespace adachunk {

const std::vector<std::string> kReportHeader{
    "video",          "segmentation",   "augmentation",    "abr",           "bucket",
    "eval_model",     "status",         "traces",          "improvement_mean",
    "improvement_p5", "improvement_p95", "rebuffer_ratio", "fluctuation",   "mean_vmaf",
    "byte_overhead",  "qoe_mean"};

const std::vector<std::string> kRunsHeader{
    "video",      "segmentation", "augmentation", "abr",           "bucket",
    "trace",      "split",        "eval_model",   "qoe",           "qoe_constant",
    "improvement", "rebuffer_s",  "rebuffer_ratio", "fluctuation_raw", "mean_vmaf",
    "startup_delay"};

namespace {

using json = nlohmann::ordered_json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

bool needs_training(SegStrategy s, const std::optional<AugStrategy>& a) {
  return s == SegStrategy::sim || s == SegStrategy::wide_eye || a == AugStrategy::sigma_bv;
}

// One chunking to build: everything except the bucket.
struct Job {
  std::size_t video = 0;
  SegStrategy seg = SegStrategy::constant;
  std::optional<AugStrategy> aug;
  std::string abr;
};

struct JobResult {
  Chunking chunking;
  std::string error;
  std::vector<std::string> seg_log;
  std::vector<std::string> aug_log;
  std::vector<std::string> warnings;
};

struct RunRow {
  double qoe = 0.0;
  double rebuffer_s = 0.0;
  double rebuffer_ratio = 0.0;
  double fluctuation_raw = 0.0;
  double mean_vmaf = 0.0;
  double startup = 0.0;
  double duration = 0.0;
  std::string error;
};

std::string fmt(double x) { return std::isfinite(x) ? format_fixed(x, 6) : ""; }

}  // namespace

std::string aug_label(const std::optional<AugStrategy>& a) {
  return a ? std::string(to_string(*a)) : "none";
}

SegConfig ExperimentSpec::seg_config(SegStrategy s) const {
  SegConfig cfg = segmenter;
  cfg.strategy = s;
  cfg.aggregate = aggregate;
  if (s == SegStrategy::wide_eye) {
    cfg.k = wide_eye_k;
    cfg.commit_window = wide_eye_commit_window;
  }
  return cfg;
}

ExperimentSpec experiment_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentSpec spec;
  try {
    const auto j = json::parse(text);
    if (j.value("schema", std::string()) != "experiment/1") {
      throw ValidationError("unsupported experiment schema (expected experiment/1)");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() ? base_dir / path : path;
    };
    for (const auto& v : j.at("videos")) spec.videos.push_back(resolve(v.get<std::string>()));
    spec.traces = resolve(j.at("traces").get<std::string>());
    for (const auto& s : j.at("segmentations")) {
      spec.segmentations.push_back(parse_seg_strategy(s.get<std::string>()));
    }
    for (const auto& a : j.value("augmentations", json::array({"none"}))) {
      const auto name = a.get<std::string>();
      if (name == "none") {
        spec.augmentations.emplace_back(std::nullopt);
      } else {
        spec.augmentations.emplace_back(parse_aug_strategy(name));
      }
    }
    for (const auto& a : j.at("abrs")) spec.abrs.push_back(a.get<std::string>());
    if (j.contains("buckets")) {
      spec.buckets.clear();
      for (const auto& b : j.at("buckets")) spec.buckets.push_back(parse_bucket(b.get<std::string>()));
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      spec.weights.lambda_per_s = get_or(w, "lambda_per_s", spec.weights.lambda_per_s);
      spec.weights.beta = get_or(w, "beta", spec.weights.beta);
      spec.weights.gamma = get_or(w, "gamma", spec.weights.gamma);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      spec.train_fraction = get_or(s, "train_fraction", spec.train_fraction);
      spec.split_seed = get_or<std::uint64_t>(s, "seed", spec.split_seed);
    }
    spec.min_trace_duration = get_or(j, "min_trace_duration", spec.min_trace_duration);
    if (j.contains("aggregate")) spec.aggregate = Aggregate::parse(j.at("aggregate").get<std::string>());
    if (j.contains("decision_model")) {
      spec.decision_model = parse_vmaf_model(j.at("decision_model").get<std::string>());
    }
    if (j.contains("evaluation_models")) {
      for (const auto& [k, v] : j.at("evaluation_models").items()) {
        spec.evaluation_models[parse_bucket(k)] = parse_vmaf_model(v.get<std::string>());
      }
    }
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      spec.sim.rtt = get_or(s, "rtt", spec.sim.rtt);
      spec.sim.max_buffer = get_or(s, "max_buffer", spec.sim.max_buffer);
      spec.sim.startup_buffer = get_or(s, "startup_buffer", spec.sim.startup_buffer);
      spec.sim.rtt_in_throughput_sample =
          get_or(s, "rtt_in_throughput_sample", spec.sim.rtt_in_throughput_sample);
      spec.sim.trace_looping = get_or(s, "trace_looping", spec.sim.trace_looping);
    }
    if (j.contains("segmenter")) {
      const auto& s = j.at("segmenter");
      auto& c = spec.segmenter;
      c.k = get_or(s, "k", c.k);
      c.commit_window = get_or(s, "commit_window", c.commit_window);
      spec.wide_eye_k = get_or(s, "wide_eye_k", spec.wide_eye_k);
      spec.wide_eye_commit_window = get_or(s, "wide_eye_commit_window", spec.wide_eye_commit_window);
      c.filter_width = get_or(s, "filter_width", c.filter_width);
      c.target_len = get_or(s, "target_len", c.target_len);
      c.penalty_rate = get_or(s, "penalty_rate", c.penalty_rate);
      c.symmetric_bytes = get_or(s, "symmetric_bytes", c.symmetric_bytes);
      if (s.contains("byte_target")) c.byte_target = s.at("byte_target").get<double>();
    }
    if (j.contains("augmenter")) {
      const auto& a = j.at("augmenter");
      auto& c = spec.augmenter;
      c.vmaf_drop_threshold = get_or(a, "vmaf_drop_threshold", c.vmaf_drop_threshold);
      c.bitrate_excess = get_or(a, "bitrate_excess", c.bitrate_excess);
      c.vmaf_gap = get_or(a, "vmaf_gap", c.vmaf_gap);
      c.lookahead_segments = get_or(a, "lookahead_segments", c.lookahead_segments);
    }
    if (j.contains("rmpc")) {
      spec.abr.mpc.horizon = get_or<std::size_t>(j.at("rmpc"), "horizon", spec.abr.mpc.horizon);
    }
    spec.output = resolve(j.value("output", std::string("out")));
    spec.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment parse error: ") + e.what());
  }
  spec.augmenter.decision_model = spec.decision_model;
  spec.abr.mpc.weights = spec.weights;
  spec.abr.mpc.decision_model = spec.decision_model;
  spec.abr.bb.max_buffer = spec.sim.max_buffer;
  validate(spec);
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(read_text_file(path), path.parent_path());
}

void validate(const ExperimentSpec& spec) {
  if (spec.videos.empty() || spec.segmentations.empty() || spec.augmentations.empty() ||
      spec.abrs.empty() || spec.buckets.empty()) {
    throw ValidationError("experiment matrix is empty");
  }
  for (const auto& v : spec.videos) {
    if (!std::filesystem::exists(v)) throw ValidationError("video not found: " + v.string());
  }
  if (!std::filesystem::exists(spec.traces)) {
    throw ValidationError("trace manifest not found: " + spec.traces.string());
  }
  for (const auto& a : spec.abrs) make_policy(a, spec.abr);
  validate(spec.weights);
  validate(spec.sim);
  validate(spec.augmenter);
  for (auto s : spec.segmentations) validate(spec.seg_config(s));
}

PipelineResult run_pipeline(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<VideoMeta> videos;
  for (const auto& p : spec.videos) videos.push_back(load_video(p));
  {
    std::set<std::string> ids;
    for (const auto& v : videos) {
      if (!ids.insert(v.video_id).second) throw ValidationError("duplicate video id " + v.video_id);
    }
  }
  const auto corpus = load_manifest(spec.traces, spec.min_trace_duration, spec.train_fraction,
                                    spec.split_seed);
  const auto train = corpus.select(Split::train);

  // Canonical job order; Constant without augmentation is always built as the baseline.
  std::vector<Job> jobs;
  auto job_index = [&](std::size_t v, SegStrategy s, const std::optional<AugStrategy>& a,
                       const std::string& abr) -> std::size_t {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& j = jobs[i];
      if (j.video == v && j.seg == s && j.aug == a && j.abr == abr) return i;
    }
    jobs.push_back({v, s, a, abr});
    return jobs.size() - 1;
  };
  std::vector<std::size_t> video_order(videos.size());
  for (std::size_t i = 0; i < video_order.size(); ++i) video_order[i] = i;
  std::sort(video_order.begin(), video_order.end(),
            [&](std::size_t a, std::size_t b) { return videos[a].video_id < videos[b].video_id; });
  auto abrs = spec.abrs;
  std::sort(abrs.begin(), abrs.end());
  abrs.erase(std::unique(abrs.begin(), abrs.end()), abrs.end());
  auto segs = spec.segmentations;
  std::sort(segs.begin(), segs.end());
  segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
  auto augs = spec.augmentations;
  std::sort(augs.begin(), augs.end());
  augs.erase(std::unique(augs.begin(), augs.end()), augs.end());
  auto buckets = spec.buckets;
  std::sort(buckets.begin(), buckets.end());
  buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());

  struct Cell {
    std::size_t job;
    std::size_t baseline;
    Bucket bucket;
  };
  std::vector<Cell> cells;
  for (std::size_t v : video_order) {
    for (auto s : segs) {
      for (const auto& a : augs) {
        for (const auto& abr : abrs) {
          const std::size_t base = job_index(v, SegStrategy::constant, std::nullopt, abr);
          const std::size_t job = job_index(v, s, a, abr);
          for (auto b : buckets) cells.push_back({job, base, b});
        }
      }
    }
  }

  // Phase 1: chunkings.
  std::vector<JobResult> built(jobs.size());
  parallel_for(jobs.size(), spec.threads, [&](std::size_t i) {
    const auto& job = jobs[i];
    auto& out = built[i];
    try {
      const auto& video = videos[job.video];
      const auto policy = make_policy(job.abr, spec.abr);
      SimDeps deps;
      deps.abr = policy.get();
      deps.traces = train;
      deps.sim = spec.sim;
      deps.weights = spec.weights;
      deps.decision_model = spec.decision_model;
      deps.aggregate = spec.aggregate;
      if (needs_training(job.seg, job.aug) && train.empty()) {
        throw ValidationError("no training traces in the corpus");
      }
      auto seg = segment(video, spec.seg_config(job.seg), &deps);
      out.chunking.segments = std::move(seg.segments);
      out.seg_log = std::move(seg.log);
      if (job.aug) {
        AugConfig cfg = spec.augmenter;
        cfg.strategy = *job.aug;
        auto aug = augment(video, out.chunking.segments, cfg, &deps);
        out.chunking.augmentations = std::move(aug.augmentations);
        out.aug_log = std::move(aug.log);
        out.warnings = std::move(aug.warnings);
      }
      validate(out.chunking, video);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  // Phase 2: simulate every job on the test traces of each requested bucket.
  std::map<Bucket, std::vector<const NetworkTrace*>> test;
  for (auto b : buckets) test[b] = corpus.select(Split::test, b);
  struct Sim {
    std::size_t job;
    Bucket bucket;
    const NetworkTrace* trace;
  };
  std::vector<Sim> sims;
  std::map<std::tuple<std::size_t, Bucket, std::string>, std::size_t> sim_index;
  std::set<std::pair<std::size_t, Bucket>> wanted;
  for (const auto& c : cells) {
    wanted.insert({c.job, c.bucket});
    wanted.insert({c.baseline, c.bucket});
  }
  for (const auto& [job, b] : wanted) {
    for (const auto* t : test[b]) {
      sim_index[{job, b, t->id()}] = sims.size();
      sims.push_back({job, b, t});
    }
  }
  std::vector<RunRow> runs(sims.size());
  parallel_for(sims.size(), spec.threads, [&](std::size_t i) {
    const auto& s = sims[i];
    auto& row = runs[i];
    const auto& built_job = built[s.job];
    if (!built_job.error.empty()) {
      row.error = built_job.error;
      return;
    }
    try {
      const auto& video = videos[jobs[s.job].video];
      const auto policy = make_policy(jobs[s.job].abr, spec.abr);
      const auto outcome = simulate(video, built_job.chunking, *policy, *s.trace, spec.sim);
      const auto q = qoe(outcome, spec.weights, spec.evaluation_models.at(s.bucket));
      row.qoe = q.total;
      row.rebuffer_s = q.rebuffer_s;
      row.rebuffer_ratio = q.rebuffer_ratio;
      row.fluctuation_raw = q.vmaf_fluctuation_raw;
      row.mean_vmaf = q.mean_vmaf;
      row.startup = outcome.startup_delay;
      row.duration = outcome.video_duration;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  // Phase 3: reports, in cell order.
  PipelineResult result;
  result.cells = cells.size();
  std::string runs_csv = csv_row(kRunsHeader);
  std::string report_csv = csv_row(kReportHeader);
  for (const auto& c : cells) {
    const auto& job = jobs[c.job];
    const auto& video = videos[job.video];
    const std::vector<std::string> key{video.video_id, std::string(to_string(job.seg)),
                                       aug_label(job.aug), job.abr,
                                       std::string(to_string(c.bucket))};
    const auto model = spec.evaluation_models.at(c.bucket);
    std::string error = built[c.job].error.empty() ? built[c.baseline].error : built[c.job].error;
    std::vector<double> impr, rr, fl, fl_base, vm, qs;
    for (const auto* t : test[c.bucket]) {
      const auto& r = runs[sim_index.at({c.job, c.bucket, t->id()})];
      const auto& base = runs[sim_index.at({c.baseline, c.bucket, t->id()})];
      if (!r.error.empty() || !base.error.empty()) {
        if (error.empty()) error = "trace " + t->id() + ": " + (r.error.empty() ? base.error : r.error);
        continue;
      }
      const double improvement =
          qoe_improvement(r.qoe, base.qoe, qoe_max(r.duration, spec.weights));
      impr.push_back(improvement);
      rr.push_back(r.rebuffer_ratio);
      fl.push_back(r.fluctuation_raw);
      fl_base.push_back(base.fluctuation_raw);
      vm.push_back(r.mean_vmaf);
      qs.push_back(r.qoe);
      auto fields = key;
      fields.insert(fields.end(), {t->id(), std::string(to_string(corpus.split.at(t->id()))),
                                   std::string(to_string(model)), fmt(r.qoe), fmt(base.qoe),
                                   fmt(improvement), fmt(r.rebuffer_s), fmt(r.rebuffer_ratio),
                                   fmt(r.fluctuation_raw), fmt(r.mean_vmaf), fmt(r.startup)});
      runs_csv += csv_row(fields);
    }
    if (error.empty() && impr.empty()) error = "no test traces in bucket";

    auto fields = key;
    fields.push_back(std::string(to_string(model)));
    if (!error.empty()) {
      result.failures.push_back(key[0] + "/" + key[1] + "/" + key[2] + "/" + key[3] + "/" +
                                key[4] + ": " + error);
      fields.push_back("error");
      fields.push_back(std::to_string(impr.size()));
      fields.resize(kReportHeader.size());
    } else {
      const double base_fl = mean(fl_base);
      fields.insert(fields.end(),
                    {"ok", std::to_string(impr.size()), fmt(mean(impr)), fmt(percentile(impr, 5)),
                     fmt(percentile(impr, 95)), fmt(mean(rr)),
                     base_fl > 0.0 ? fmt(fluctuation_normalized(mean(fl), base_fl)) : "",
                     fmt(mean(vm)), fmt(byte_overhead(built[c.job].chunking, video)),
                     fmt(mean(qs))});
    }
    report_csv += csv_row(fields);
  }

  const auto& out = spec.output;
  write_text_file(out / "runs.csv", runs_csv);
  write_text_file(out / "report.csv", report_csv);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const auto stem = safe_name(videos[job.video].video_id) + "__" + std::string(to_string(job.seg)) +
                      "__" + aug_label(job.aug) + "__" + job.abr;
    if (!built[i].error.empty()) continue;
    write_text_file(out / "chunkings" / (stem + ".json"), chunking_to_json(built[i].chunking));
    auto join = [](const std::vector<std::string>& lines) {
      std::string s;
      for (const auto& l : lines) s += l + "\n";
      return s;
    };
    if (!built[i].seg_log.empty()) {
      write_text_file(out / "logs" / (stem + ".segment.jsonl"), join(built[i].seg_log));
    }
    if (!built[i].aug_log.empty() || !built[i].warnings.empty()) {
      std::vector<std::string> lines = built[i].aug_log;
      for (const auto& w : built[i].warnings) lines.push_back(json{{"warning", w}}.dump());
      write_text_file(out / "logs" / (stem + ".augment.jsonl"), join(lines));
    }
  }
  return result;
}

std::string compare_reports(std::string_view report_a, std::string_view report_b) {
  const std::vector<std::string> metrics{"improvement_mean", "rebuffer_ratio", "fluctuation",
                                         "mean_vmaf", "byte_overhead"};
  constexpr std::size_t kKeyCols = 5;
  auto load = [&](std::string_view text, const char* name) {
    const auto rows = parse_csv(text);
    if (rows.empty() || rows[0] != kReportHeader) {
      throw ValidationError(std::string("report ") + name + " has an unexpected header");
    }
    std::map<std::vector<std::string>, std::map<std::string, std::string>> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != kReportHeader.size()) {
        throw ValidationError(std::string("report ") + name + ": row " + std::to_string(r) +
                              " has the wrong number of fields");
      }
      std::vector<std::string> key(rows[r].begin(), rows[r].begin() + kKeyCols);
      std::map<std::string, std::string> values;
      for (std::size_t c = kKeyCols; c < kReportHeader.size(); ++c) values[kReportHeader[c]] = rows[r][c];
      cells[key] = std::move(values);
    }
    return cells;
  };
  const auto a = load(report_a, "A");
  const auto b = load(report_b, "B");
  auto name = [](const std::vector<std::string>& key) {
    std::string s;
    for (const auto& k : key) s += (s.empty() ? "" : "/") + k;
    return s;
  };
  for (const auto& [key, _] : a) {
    if (!b.contains(key)) throw ValidationError("cell " + name(key) + " missing from report B");
  }
  for (const auto& [key, _] : b) {
    if (!a.contains(key)) throw ValidationError("cell " + name(key) + " missing from report A");
  }
  std::vector<std::string> header(kReportHeader.begin(), kReportHeader.begin() + kKeyCols);
  for (const auto& m : metrics) header.push_back("delta_" + m);
  std::string out = csv_row(header);
  for (const auto& [key, va] : a) {
    const auto& vb = b.at(key);
    auto fields = key;
    for (const auto& m : metrics) {
      const auto& x = va.at(m);
      const auto& y = vb.at(m);
      if (x.empty() || y.empty()) {
        fields.push_back("");
        continue;
      }
      fields.push_back(format_fixed(std::stod(y) - std::stod(x), 6));
    }
    out += csv_row(fields);
  }
  return out;
}

}  // namespace adachunk
