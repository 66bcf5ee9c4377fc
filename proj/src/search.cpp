#include "adachunk/search.hpp"

#include <cstdlib>

#include "adachunk/error.hpp"
#include "adachunk/io.hpp"
#include "adachunk/qoe.hpp"
#include "adachunk/stats.hpp"

namespace adachunk {

double Aggregate::apply(std::span<const double> qoes) const {
  return kind == Kind::mean ? mean(qoes) : percentile(qoes, p);
}

Aggregate Aggregate::parse(std::string_view s) {
  if (s == "mean") return {};
  if (s.size() > 1 && s.front() == 'p') {
    const std::string num(s.substr(1));
    char* end = nullptr;
    const double p = std::strtod(num.c_str(), &end);
    if (end == num.c_str() + num.size() && p >= 0.0 && p <= 100.0) {
      return {Kind::percentile, p};
    }
  }
  throw ValidationError("aggregate must be \"mean\" or \"p<0-100>\", got " + std::string(s));
}

std::string Aggregate::to_string() const {
  return kind == Kind::mean ? "mean" : "p" + format_exact(p);
}

FrontierCache::FrontierCache(const VideoMeta& video, const SimDeps& deps)
    : video_(video), deps_(deps), states_(deps.traces.size()) {
  if (deps.abr == nullptr) throw ValidationError("simulation search needs an abr policy");
  if (deps.traces.empty()) throw ValidationError("simulation search needs training traces");
  validate(deps.sim);
}

void FrontierCache::commit(PlayUnit unit) {
  committed_.push_back(std::move(unit));
  advance();
}

void FrontierCache::advance() {
  const std::size_t reach = deps_.abr->lookahead_units();
  if (cached_ + reach > committed_.size()) return;
  const std::size_t target = committed_.size() - reach + 1;
  Playlist pl;
  pl.first_unit = cached_;
  pl.units.assign(committed_.begin() + static_cast<std::ptrdiff_t>(cached_),
                  committed_.begin() + static_cast<std::ptrdiff_t>(target));
  // The ABR of the last advanced unit may look at the committed units after it.
  std::vector<PlayUnit> rest(committed_.begin() + static_cast<std::ptrdiff_t>(target),
                             committed_.end());
  pl.tail = rest;
  for (std::size_t t = 0; t < states_.size(); ++t) {
    run(states_[t], pl, SimEnv{video_, *deps_.abr, *deps_.traces[t], deps_.sim});
  }
  cached_ = target;
}

std::vector<SimOutcome> FrontierCache::outcomes(std::span<const PlayUnit> continuation,
                                                std::span<const PlayUnit> tail) const {
  Playlist pl;
  pl.first_unit = cached_;
  pl.units.reserve(committed_.size() - cached_ + continuation.size());
  pl.units.insert(pl.units.end(), committed_.begin() + static_cast<std::ptrdiff_t>(cached_),
                  committed_.end());
  pl.units.insert(pl.units.end(), continuation.begin(), continuation.end());
  pl.tail = tail;
  std::vector<SimOutcome> out;
  out.reserve(states_.size());
  for (std::size_t t = 0; t < states_.size(); ++t) {
    PlayerState s = states_[t];
    run(s, pl, SimEnv{video_, *deps_.abr, *deps_.traces[t], deps_.sim});
    out.push_back(finish(std::move(s)));
  }
  return out;
}

std::vector<double> FrontierCache::evaluate(std::span<const PlayUnit> continuation,
                                            std::span<const PlayUnit> tail) const {
  std::vector<double> q;
  for (const auto& o : outcomes(continuation, tail)) {
    q.push_back(qoe(o, deps_.weights, deps_.decision_model).total);
  }
  return q;
}

}  // namespace adachunk
