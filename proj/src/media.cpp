#include "adachunk/media.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"

namespace adachunk {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kVideoSchema = "video-meta/1";
constexpr std::string_view kChunkingSchema = "chunking/1";

std::string fragment_prefix(std::size_t i) {
  return "fragment " + std::to_string(i) + ": ";
}

json vmaf_to_json(const VmafSeries& v) {
  json out = json::object();
  for (VmafModel m : kVmafModels) out[std::string(to_string(m))] = v[m];
  return out;
}

VmafSeries vmaf_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + "vmaf must be an object");
  VmafSeries v;
  for (VmafModel m : kVmafModels) {
    const std::string key(to_string(m));
    if (!j.contains(key)) throw ValidationError(where + "missing vmaf model " + key);
    v[m] = j.at(key).get<std::vector<double>>();
  }
  return v;
}

void check_series(const VmafSeries& v, std::size_t expected, const std::string& where) {
  for (VmafModel m : kVmafModels) {
    const auto& s = v[m];
    if (s.size() != expected) {
      throw ValidationError(where + "vmaf " + std::string(to_string(m)) + " has " +
                            std::to_string(s.size()) + " samples, expected " +
                            std::to_string(expected));
    }
    for (double x : s) {
      if (!(x >= 0.0 && x <= 100.0)) {
        throw ValidationError(where + "vmaf value out of [0,100]");
      }
    }
  }
}

template <typename Fn>
auto parse_guarded(std::string_view text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("parse error: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(VmafModel m) {
  switch (m) {
    case VmafModel::mobile: return "mobile";
    case VmafModel::hdtv: return "hdtv";
    case VmafModel::uhd4k: return "uhd4k";
  }
  return "?";
}

VmafModel parse_vmaf_model(std::string_view s) {
  for (VmafModel m : kVmafModels) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown vmaf model: " + std::string(s));
}

double VideoMeta::total_duration() const {
  double total = 0.0;
  for (const auto& f : fragments) total += f.duration;
  return total;
}

std::size_t seconds_for(double duration) {
  return static_cast<std::size_t>(std::ceil(duration - 1e-9));
}

double segment_duration(const VideoMeta& video, const Segment& seg) {
  double d = 0.0;
  for (int f = seg.first; f <= seg.last; ++f) d += video.fragments[f].duration;
  return d;
}

std::int64_t segment_bytes(const VideoMeta& video, const Segment& seg, int track) {
  std::int64_t b = 0;
  for (int f = seg.first; f <= seg.last; ++f) b += video.fragments[f].tracks[track].bytes;
  return b;
}

VmafSeries segment_vmaf(const VideoMeta& video, const Segment& seg, int track) {
  VmafSeries out;
  for (int f = seg.first; f <= seg.last; ++f) {
    const auto& src = video.fragments[f].tracks[track].vmaf;
    for (VmafModel m : kVmafModels) out[m].insert(out[m].end(), src[m].begin(), src[m].end());
  }
  return out;
}

std::vector<double> segment_sample_lengths(const VideoMeta& video, const Segment& seg) {
  std::vector<double> lengths;
  for (int f = seg.first; f <= seg.last; ++f) {
    const double d = video.fragments[f].duration;
    const std::size_t n = seconds_for(d);
    for (std::size_t k = 0; k < n; ++k) {
      lengths.push_back(std::min(1.0, d - static_cast<double>(k)));
    }
  }
  return lengths;
}

double weighted_mean(const std::vector<double>& series, const std::vector<double>& lengths) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    num += series[k] * lengths[k];
    den += lengths[k];
  }
  return den > 0.0 ? num / den : 0.0;
}

SegmentStats segment_stats(const VideoMeta& video, const Segment& seg, int track) {
  SegmentStats s;
  s.duration = segment_duration(video, seg);
  s.bytes = segment_bytes(video, seg, track);
  s.kbps = kbps_of(s.bytes, s.duration);
  const auto lengths = segment_sample_lengths(video, seg);
  const auto series = segment_vmaf(video, seg, track);
  for (VmafModel m : kVmafModels) {
    s.mean_vmaf[static_cast<std::size_t>(m)] = weighted_mean(series[m], lengths);
  }
  return s;
}

void validate(const VideoMeta& video) {
  if (video.ladder.empty()) throw ValidationError("ladder is empty");
  for (std::size_t j = 0; j < video.ladder.size(); ++j) {
    const auto& t = video.ladder[j];
    if (t.id != static_cast<int>(j)) throw ValidationError("ladder ids not contiguous from 0");
    if (!(t.kbps > 0.0)) throw ValidationError("ladder bitrate must be positive");
    if (j > 0 && !(t.kbps > video.ladder[j - 1].kbps)) {
      throw ValidationError("ladder not increasing at track " + std::to_string(j));
    }
  }
  if (video.fragments.empty()) throw ValidationError("video has no fragments");
  for (std::size_t i = 0; i < video.fragments.size(); ++i) {
    const auto& f = video.fragments[i];
    const auto where = fragment_prefix(i);
    if (!(f.duration > 0.0)) throw ValidationError(where + "duration must be positive");
    if (f.tracks.size() != video.ladder.size()) {
      throw ValidationError(where + "has " + std::to_string(f.tracks.size()) +
                            " track entries, ladder has " + std::to_string(video.ladder.size()) +
                            " (missing track " + std::to_string(f.tracks.size()) + ")");
    }
    for (std::size_t j = 0; j < f.tracks.size(); ++j) {
      const auto tw = where + "track " + std::to_string(j) + ": ";
      if (f.tracks[j].bytes <= 0) throw ValidationError(tw + "bytes must be positive");
      check_series(f.tracks[j].vmaf, seconds_for(f.duration), tw);
    }
  }
}

void validate_partition(const Segmentation& segs, std::size_t fragment_count) {
  int next = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (segs[s].first != next || segs[s].last < segs[s].first) {
      throw ValidationError("segment " + std::to_string(s) +
                            " breaks the contiguous partition of fragments");
    }
    next = segs[s].last + 1;
  }
  if (next != static_cast<int>(fragment_count)) {
    throw ValidationError("segmentation covers " + std::to_string(next) + " of " +
                          std::to_string(fragment_count) + " fragments");
  }
}

void validate(const Chunking& chunking, const VideoMeta& video) {
  validate_partition(chunking.segments, video.fragment_count());
  std::set<std::pair<int, int>> seen;
  for (std::size_t a = 0; a < chunking.augmentations.size(); ++a) {
    const auto& aug = chunking.augmentations[a];
    const auto where = "augmentation " + std::to_string(a) + ": ";
    if (aug.segment < 0 || aug.segment >= static_cast<int>(chunking.segments.size())) {
      throw ValidationError(where + "segment index out of range");
    }
    const auto [lo, hi] = aug.between;
    if (lo < 0 || hi != lo + 1 || hi >= static_cast<int>(video.track_count())) {
      throw ValidationError(where + "must sit between two adjacent tracks");
    }
    if (!seen.emplace(aug.segment, lo).second) {
      throw ValidationError(where + "duplicate augmentation for segment/track gap");
    }
    const auto& seg = chunking.segments[aug.segment];
    const double lo_kbps = segment_stats(video, seg, lo).kbps;
    const double hi_kbps = segment_stats(video, seg, hi).kbps;
    if (!(aug.kbps > lo_kbps && aug.kbps < hi_kbps)) {
      throw ValidationError(where + "bitrate not strictly between bracketing tracks");
    }
    if (aug.bytes <= 0) throw ValidationError(where + "bytes must be positive");
    check_series(aug.vmaf, segment_sample_lengths(video, seg).size(), where);
  }
}

std::string video_to_json(const VideoMeta& video) {
  json j;
  j["schema"] = kVideoSchema;
  j["video_id"] = video.video_id;
  j["fps"] = video.fps;
  j["ladder"] = json::array();
  for (const auto& t : video.ladder) {
    j["ladder"].push_back({{"id", t.id}, {"kbps", t.kbps}, {"label", t.label}});
  }
  j["fragments"] = json::array();
  for (const auto& f : video.fragments) {
    json fj;
    fj["duration_s"] = f.duration;
    fj["tracks"] = json::array();
    for (const auto& t : f.tracks) {
      fj["tracks"].push_back({{"bytes", t.bytes}, {"vmaf", vmaf_to_json(t.vmaf)}});
    }
    j["fragments"].push_back(std::move(fj));
  }
  return j.dump(1) + "\n";
}

VideoMeta video_from_json(std::string_view text) {
  return parse_guarded(text, [](const json& j) {
    if (j.value("schema", std::string()) != kVideoSchema) {
      throw ValidationError("unsupported metadata schema (expected " + std::string(kVideoSchema) +
                            ")");
    }
    VideoMeta v;
    v.video_id = j.at("video_id").get<std::string>();
    v.fps = j.at("fps").get<double>();
    for (const auto& t : j.at("ladder")) {
      v.ladder.push_back(
          {t.at("id").get<int>(), t.at("kbps").get<double>(), t.value("label", std::string())});
    }
    const auto& frags = j.at("fragments");
    for (std::size_t i = 0; i < frags.size(); ++i) {
      const auto& fj = frags[i];
      Fragment f;
      f.duration = fj.at("duration_s").get<double>();
      for (const auto& tj : fj.at("tracks")) {
        TrackFragment t;
        t.bytes = tj.at("bytes").get<std::int64_t>();
        t.vmaf = vmaf_from_json(tj.at("vmaf"), fragment_prefix(i));
        f.tracks.push_back(std::move(t));
      }
      v.fragments.push_back(std::move(f));
    }
    validate(v);
    return v;
  });
}

VideoMeta load_video(const std::filesystem::path& path) {
  return video_from_json(read_text_file(path));
}

void save_video(const VideoMeta& video, const std::filesystem::path& path) {
  write_text_file(path, video_to_json(video));
}

std::string chunking_to_json(const Chunking& chunking) {
  json j;
  j["schema"] = kChunkingSchema;
  j["segments"] = json::array();
  for (const auto& s : chunking.segments) j["segments"].push_back({{"first", s.first}, {"last", s.last}});
  j["augmentations"] = json::array();
  for (const auto& a : chunking.augmentations) {
    j["augmentations"].push_back({{"segment", a.segment},
                                  {"kbps", a.kbps},
                                  {"bytes", a.bytes},
                                  {"vmaf", vmaf_to_json(a.vmaf)},
                                  {"between", {a.between.first, a.between.second}}});
  }
  return j.dump(1) + "\n";
}

Chunking chunking_from_json(std::string_view text) {
  return parse_guarded(text, [](const json& j) {
    if (j.value("schema", std::string()) != kChunkingSchema) {
      throw ValidationError("unsupported chunking schema (expected " +
                            std::string(kChunkingSchema) + ")");
    }
    Chunking c;
    for (const auto& s : j.at("segments")) {
      c.segments.push_back({s.at("first").get<int>(), s.at("last").get<int>()});
    }
    for (const auto& a : j.at("augmentations")) {
      Augmentation aug;
      aug.segment = a.at("segment").get<int>();
      aug.kbps = a.at("kbps").get<double>();
      aug.bytes = a.at("bytes").get<std::int64_t>();
      aug.vmaf = vmaf_from_json(a.at("vmaf"), "augmentation: ");
      const auto between = a.at("between").get<std::vector<int>>();
      if (between.size() != 2) throw ValidationError("augmentation between must have 2 entries");
      aug.between = {between[0], between[1]};
      c.augmentations.push_back(std::move(aug));
    }
    return c;
  });
}

Chunking load_chunking(const std::filesystem::path& path) {
  return chunking_from_json(read_text_file(path));
}

void save_chunking(const Chunking& chunking, const std::filesystem::path& path) {
  write_text_file(path, chunking_to_json(chunking));
}

}  // namespace adachunk
