#include "adachunk/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"

namespace adachunk {

namespace {

constexpr std::string_view kManifestSchema = "trace-corpus/1";

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ',' && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line_no) {
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    throw ValidationError("line " + std::to_string(line_no) + ": not a number: " + buf);
  }
  return v;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') fn(line, line_no);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

}  // namespace

std::string_view to_string(TraceSource s) {
  return s == TraceSource::cooked ? "cooked" : "mahimahi";
}

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::slow: return "SLOW";
    case Bucket::medium: return "MEDIUM";
    case Bucket::fast: return "FAST";
  }
  return "?";
}

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

Bucket parse_bucket(std::string_view s) {
  std::string upper(s);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Bucket b : {Bucket::slow, Bucket::medium, Bucket::fast}) {
    if (to_string(b) == upper) return b;
  }
  throw ValidationError("unknown bucket: " + std::string(s));
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split: " + std::string(s));
}

NetworkTrace::NetworkTrace(std::string id, std::vector<TraceSample> samples, TraceSource source)
    : id_(std::move(id)), samples_(std::move(samples)), source_(source) {
  if (samples_.size() < 2) throw ValidationError("trace " + id_ + ": needs at least 2 samples");
  if (samples_.front().t != 0.0) throw ValidationError("trace " + id_ + ": must start at t=0");
  cumulative_.resize(samples_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].mbps >= 0.0)) throw ValidationError("trace " + id_ + ": negative bandwidth");
    if (i > 0) {
      if (!(samples_[i].t > samples_[i - 1].t)) {
        throw ValidationError("trace " + id_ + ": non-monotone time at sample " +
                              std::to_string(i));
      }
      cumulative_[i] =
          cumulative_[i - 1] + samples_[i - 1].mbps * (samples_[i].t - samples_[i - 1].t);
    }
  }
}

double NetworkTrace::cumulative_at(double t) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const TraceSample& s) { return v < s.t; });
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - samples_.begin() - 1));
  if (i + 1 >= samples_.size()) return cumulative_.back();
  return cumulative_[i] + samples_[i].mbps * (t - samples_[i].t);
}

double NetworkTrace::inverse_cumulative(double mbits) const {
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), mbits);
  const auto k = static_cast<std::size_t>(it - cumulative_.begin());
  if (k == 0) return 0.0;
  if (k >= cumulative_.size()) return duration();
  const auto& s = samples_[k - 1];
  return std::min(samples_[k].t, s.t + (mbits - cumulative_[k - 1]) / s.mbps);
}

double NetworkTrace::mbps_at(double t, bool looping) const {
  const double T = duration();
  if (t >= T) {
    if (!looping) return samples_.back().mbps;
    t = std::fmod(t, T);
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const TraceSample& s) { return v < s.t; });
  return std::prev(it)->mbps;
}

double NetworkTrace::megabits_between(double t0, double t1, bool looping) const {
  const double T = duration();
  const double C = cumulative_.back();
  auto F = [&](double t) {
    if (looping) {
      const double periods = std::floor(t / T);
      return periods * C + cumulative_at(t - periods * T);
    }
    return t <= T ? cumulative_at(t) : C + (t - T) * samples_.back().mbps;
  };
  return F(t1) - F(t0);
}

double NetworkTrace::time_to_deliver(double t0, double megabits, bool looping) const {
  const double T = duration();
  const double C = cumulative_.back();
  if (megabits <= 0.0) return t0;
  double result = 0.0;
  if (looping) {
    if (C <= 0.0) throw RuntimeError("stalled trace: " + id_ + " never delivers data");
    const double p0 = std::floor(t0 / T);
    const double local0 = t0 - p0 * T;
    const double target = cumulative_at(local0) + megabits;  // relative to period p0 start
    double p = std::floor(target / C);
    double rem = target - p * C;
    if (rem <= 0.0 && p > 0.0) {
      p -= 1.0;
      rem = C;
    }
    result = (p0 + p) * T + inverse_cumulative(rem);
  } else {
    const double start = t0 <= T ? cumulative_at(t0) : C + (t0 - T) * samples_.back().mbps;
    const double target = start + megabits;
    if (target <= C) {
      result = inverse_cumulative(target);
    } else {
      const double tail = samples_.back().mbps;
      if (tail <= 0.0) throw RuntimeError("stalled trace: " + id_ + " ends at zero bandwidth");
      result = T + (target - C) / tail;
    }
  }
  return std::max(result, t0);
}

double NetworkTrace::mean_mbps() const { return cumulative_.back() / duration(); }

NetworkTrace NetworkTrace::scaled(double factor) const {
  auto s = samples_;
  for (auto& x : s) x.mbps *= factor;
  return NetworkTrace(id_, std::move(s), source_);
}

NetworkTrace parse_cooked(std::string id, std::string_view text) {
  std::vector<TraceSample> samples;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto fields = split_fields(line);
    if (fields.empty()) return;
    if (fields.size() != 2) {
      throw ValidationError("trace " + id + " line " + std::to_string(no) +
                            ": expected \"t_seconds,mbps\"");
    }
    const double t = parse_number(fields[0], no);
    const double bw = parse_number(fields[1], no);
    if (bw < 0.0) throw ValidationError("trace " + id + ": negative bandwidth at line " + std::to_string(no));
    if (!samples.empty() && !(t > samples.back().t)) {
      throw ValidationError("trace " + id + ": non-monotone time at line " + std::to_string(no));
    }
    samples.push_back({t, bw});
  });
  if (!samples.empty()) {
    const double t0 = samples.front().t;
    for (auto& s : samples) s.t -= t0;
  }
  return NetworkTrace(std::move(id), std::move(samples), TraceSource::cooked);
}

NetworkTrace load_cooked(const std::filesystem::path& path) {
  return parse_cooked(path.stem().string(), read_text_file(path));
}

NetworkTrace parse_mahimahi(std::string id, std::string_view text, int mtu_bytes,
                            double window_ms) {
  std::vector<double> stamps;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    for (auto f : split_fields(line)) {
      const double ts = parse_number(f, no);
      if (ts < 0.0) throw ValidationError("trace " + id + ": negative timestamp");
      if (!stamps.empty() && ts < stamps.back()) {
        throw ValidationError("trace " + id + ": timestamps decrease at line " + std::to_string(no));
      }
      stamps.push_back(ts);
    }
  });
  if (stamps.empty()) throw ValidationError("trace " + id + ": empty mahimahi file");

  const double total_ms = stamps.back() > 0.0 ? stamps.back() : window_ms;
  const auto windows = static_cast<std::size_t>(std::ceil(total_ms / window_ms - 1e-9));
  std::vector<double> counts(windows, 0.0);
  for (double ts : stamps) {
    const auto w = std::min(windows - 1, static_cast<std::size_t>(ts / window_ms));
    counts[w] += 1.0;
  }
  std::vector<TraceSample> samples;
  for (std::size_t w = 0; w < windows; ++w) {
    const double start_ms = static_cast<double>(w) * window_ms;
    const double len_s = std::min(window_ms, total_ms - start_ms) / 1000.0;
    samples.push_back({start_ms / 1000.0, counts[w] * mtu_bytes * 8.0 / len_s / 1e6});
  }
  samples.push_back({total_ms / 1000.0, samples.back().mbps});
  return NetworkTrace(std::move(id), std::move(samples), TraceSource::mahimahi);
}

NetworkTrace load_mahimahi(const std::filesystem::path& path, int mtu_bytes, double window_ms) {
  return parse_mahimahi(path.stem().string(), read_text_file(path), mtu_bytes, window_ms);
}

std::string cooked_text(const NetworkTrace& trace) {
  std::string out;
  for (const auto& s : trace.samples()) {
    out += format_exact(s.t) + "," + format_exact(s.mbps) + "\n";
  }
  return out;
}

Bucket bucket(const NetworkTrace& trace) {
  const double m = trace.mean_mbps();
  if (m < 1.5) return Bucket::slow;
  if (m < 4.0) return Bucket::medium;
  return Bucket::fast;
}

std::vector<const NetworkTrace*> TraceCorpus::select(Split s) const {
  std::vector<const NetworkTrace*> out;
  for (const auto& t : traces) {
    if (split.at(t.id()) == s) out.push_back(&t);
  }
  return out;
}

std::vector<const NetworkTrace*> TraceCorpus::select(Split s, Bucket b) const {
  std::vector<const NetworkTrace*> out;
  for (const auto* t : select(s)) {
    if (bucket(*t) == b) out.push_back(t);
  }
  return out;
}

TraceCorpus split_corpus(std::vector<NetworkTrace> traces, double train_fraction,
                         std::uint64_t seed) {
  if (traces.empty()) throw ValidationError("cannot split an empty corpus");
  if (train_fraction < 0.0 || train_fraction > 1.0) {
    throw ValidationError("train fraction must lie in [0, 1]");
  }
  TraceCorpus corpus;
  corpus.traces = std::move(traces);
  std::sort(corpus.traces.begin(), corpus.traces.end(),
            [](const NetworkTrace& a, const NetworkTrace& b) { return a.id() < b.id(); });
  for (std::size_t i = 1; i < corpus.traces.size(); ++i) {
    if (corpus.traces[i].id() == corpus.traces[i - 1].id()) {
      throw ValidationError("duplicate trace id " + corpus.traces[i].id());
    }
  }
  std::mt19937_64 rng(seed);
  for (Bucket b : {Bucket::slow, Bucket::medium, Bucket::fast}) {
    std::vector<std::string> ids;
    for (const auto& t : corpus.traces) {
      if (bucket(t) == b) ids.push_back(t.id());
    }
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[rng() % i]);
    }
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      corpus.split[ids[i]] = i < n_train ? Split::train : Split::test;
    }
  }
  return corpus;
}

std::vector<NetworkTrace> filter_min_duration(std::vector<NetworkTrace> traces,
                                              double min_duration_s) {
  std::erase_if(traces, [&](const NetworkTrace& t) { return t.duration() < min_duration_s; });
  return traces;
}

NetworkTrace synth_trace(std::string id, double mean_mbps, double variability, double duration_s,
                         std::uint64_t seed) {
  if (!(mean_mbps > 0.0) || !(duration_s >= 1.0)) {
    throw ValidationError("synthetic trace needs positive mean and duration >= 1 s");
  }
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(std::ceil(duration_s));
  std::vector<double> level(n);
  double x = 0.0;
  for (auto& v : level) {
    x = 0.85 * x + variability * (2.0 * unit(rng) - 1.0);
    v = std::exp(x);
  }
  double sum = 0.0;
  for (double v : level) sum += v;
  const double scale = mean_mbps * static_cast<double>(n) / sum;
  std::vector<TraceSample> samples;
  for (std::size_t i = 0; i < n; ++i) samples.push_back({static_cast<double>(i), level[i] * scale});
  samples.push_back({static_cast<double>(n), samples.back().mbps});
  return NetworkTrace(std::move(id), std::move(samples), TraceSource::cooked);
}

TraceCorpus load_manifest(const std::filesystem::path& path, double min_duration_s,
                          double train_fraction, std::uint64_t split_seed) {
  using json = nlohmann::ordered_json;
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest parse error: ") + e.what());
  }
  if (j.value("schema", std::string()) != kManifestSchema) {
    throw ValidationError("unsupported manifest schema (expected " + std::string(kManifestSchema) + ")");
  }
  const auto base = path.parent_path();
  TraceCorpus corpus;
  std::size_t labelled = 0;
  std::size_t listed = 0;
  for (const auto& e : j.at("traces")) {
    ++listed;
    if (e.contains("split")) ++labelled;
    const auto id = e.at("id").get<std::string>();
    auto p = std::filesystem::path(e.at("path").get<std::string>());
    if (p.is_relative()) p = base / p;
    const auto format = e.value("format", std::string("cooked"));
    NetworkTrace t;
    if (format == "cooked") {
      t = parse_cooked(id, read_text_file(p));
    } else if (format == "mahimahi") {
      t = parse_mahimahi(id, read_text_file(p), e.value("mtu_bytes", 1500), e.value("window_ms", 500.0));
    } else {
      throw ValidationError("trace " + id + ": unknown format " + format);
    }
    if (t.duration() < min_duration_s) continue;
    if (e.contains("bucket") && parse_bucket(e.at("bucket").get<std::string>()) != bucket(t)) {
      throw ValidationError("trace " + id + ": manifest bucket disagrees with measured mean");
    }
    if (e.contains("split")) corpus.split[id] = parse_split(e.at("split").get<std::string>());
    corpus.traces.push_back(std::move(t));
  }
  if (labelled != 0 && labelled != listed) {
    throw ValidationError("manifest must give a split for every trace or for none");
  }
  if (corpus.traces.empty()) throw ValidationError("manifest lists no usable traces");
  if (labelled == 0) return split_corpus(std::move(corpus.traces), train_fraction, split_seed);
  return corpus;
}

void save_manifest(const TraceCorpus& corpus, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& trace_dir) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema"] = kManifestSchema;
  j["traces"] = json::array();
  const auto base = manifest_path.parent_path();
  for (const auto& t : corpus.traces) {
    const auto file = trace_dir / (t.id() + ".csv");
    write_text_file(file, cooked_text(t));
    j["traces"].push_back({{"id", t.id()},
                           {"path", std::filesystem::relative(file, base.empty() ? "." : base).string()},
                           {"format", "cooked"},
                           {"bucket", to_string(bucket(t))},
                           {"split", to_string(corpus.split.at(t.id()))}});
  }
  write_text_file(manifest_path, j.dump(1) + "\n");
}

}  // namespace adachunk
