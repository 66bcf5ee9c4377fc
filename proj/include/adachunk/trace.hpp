#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace adachunk {

enum class TraceSource { cooked, mahimahi };
enum class Bucket { slow, medium, fast };
enum class Split { train, test };

std::string_view to_string(TraceSource s);
std::string_view to_string(Bucket b);
std::string_view to_string(Split s);
Bucket parse_bucket(std::string_view s);
Split parse_split(std::string_view s);

struct TraceSample {
  double t = 0.0;     // seconds
  double mbps = 0.0;  // holds on [t, next t)
};

// Piecewise-constant bandwidth signal covering [0, duration()). When looping,
// time wraps modulo duration(); otherwise the last sample's rate holds forever.
class NetworkTrace {
 public:
  NetworkTrace() = default;
  NetworkTrace(std::string id, std::vector<TraceSample> samples, TraceSource source);

  const std::string& id() const { return id_; }
  TraceSource source() const { return source_; }
  const std::vector<TraceSample>& samples() const { return samples_; }
  double duration() const { return samples_.back().t; }

  double mbps_at(double t, bool looping) const;
  // Megabits delivered on [t0, t1).
  double megabits_between(double t0, double t1, bool looping) const;
  // Earliest t1 >= t0 with megabits_between(t0, t1) == megabits. Throws
  // RuntimeError("stalled trace") when the trace can never deliver them.
  double time_to_deliver(double t0, double megabits, bool looping) const;

  // Time-weighted mean over one period.
  double mean_mbps() const;

  NetworkTrace scaled(double factor) const;

 private:
  double cumulative_at(double t) const;  // within [0, duration()]
  double inverse_cumulative(double mbits) const;

  std::string id_;
  std::vector<TraceSample> samples_;
  std::vector<double> cumulative_;  // megabits delivered by samples_[i].t
  TraceSource source_ = TraceSource::cooked;
};

NetworkTrace parse_cooked(std::string id, std::string_view text);
NetworkTrace load_cooked(const std::filesystem::path& path);
NetworkTrace parse_mahimahi(std::string id, std::string_view text, int mtu_bytes = 1500,
                            double window_ms = 500.0);
NetworkTrace load_mahimahi(const std::filesystem::path& path, int mtu_bytes = 1500,
                           double window_ms = 500.0);
std::string cooked_text(const NetworkTrace& trace);

// SLOW < 1.5 <= MEDIUM < 4.0 <= FAST (Mbps, time-weighted mean).
Bucket bucket(const NetworkTrace& trace);

struct TraceCorpus {
  std::vector<NetworkTrace> traces;
  std::map<std::string, Split> split;

  std::vector<const NetworkTrace*> select(Split s) const;
  std::vector<const NetworkTrace*> select(Split s, Bucket b) const;
};

// Stratified by bucket: round(fraction * n) traces of each bucket go to train.
TraceCorpus split_corpus(std::vector<NetworkTrace> traces, double train_fraction,
                         std::uint64_t seed);

std::vector<NetworkTrace> filter_min_duration(std::vector<NetworkTrace> traces,
                                              double min_duration_s);

// Random-walk trace with 1 s steps rescaled to hit mean_mbps exactly.
NetworkTrace synth_trace(std::string id, double mean_mbps, double variability, double duration_s,
                         std::uint64_t seed);

// Manifest: {"schema": "trace-corpus/1", "traces": [{"id", "path", "format", "bucket", "split"}]}
// Relative paths resolve against the manifest's directory. Bucket is recomputed
// on load and must agree with the manifest when present. Without split labels
// the corpus is split with split_corpus(train_fraction, split_seed).
TraceCorpus load_manifest(const std::filesystem::path& path, double min_duration_s = 120.0,
                          double train_fraction = 0.2, std::uint64_t split_seed = 0);
void save_manifest(const TraceCorpus& corpus, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& trace_dir);

}  // namespace adachunk
