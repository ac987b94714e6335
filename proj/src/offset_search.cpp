#include "mcfs/offset_search.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mcfs {

Ns div_floor(Ns a, Ns b) {
  Ns q = a / b;
  Ns r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

Ns div_ceil(Ns a, Ns b) { return -div_floor(-a, b); }

bool patterns_conflict(Ns period_a, Ns offset_a, Ns duration_a, Ns period_b, Ns offset_b,
                       Ns duration_b) {
  if (period_a <= 0 || period_b <= 0)
    throw std::invalid_argument("patterns_conflict: periods must be positive");
  if (duration_a <= 0 || duration_b <= 0) return false;
  const Ns g = std::gcd(period_a, period_b);
  // Start distance between the families takes every value offset_b - offset_a
  // (mod g); overlap happens iff some representative lands in (-dur_b, dur_a).
  const Ns r = floor_mod(offset_b - offset_a, g);
  return r < duration_a || r > g - duration_b;
}

void CommittedLinks::commit(const AggregateFrame& frame, const Topology& topo,
                            std::span<const Ns> offsets) {
  if (offsets.size() != frame.route.links.size())
    throw std::invalid_argument("commit: offsets do not cover the route");
  for (std::size_t i = 0; i < frame.route.links.size(); ++i) {
    const Link& link = topo.link_at(frame.route.links[i]);
    const Ns dur = transmission_duration(frame.payload, kFrameOverheadBytes, link.rate_bps);
    by_link_[link.id].push_back({frame.id, frame.period, offsets[i], dur});
  }
}

const std::vector<LinkBusyPattern>* CommittedLinks::on_link(const std::string& link_id) const {
  auto it = by_link_.find(link_id);
  return it == by_link_.end() ? nullptr : &it->second;
}

CommittedLinks CommittedLinks::from_schedule(const Schedule& schedule,
                                             std::span<const AggregateFrame> frames,
                                             const Topology& topo) {
  CommittedLinks out;
  for (const AggregateFrame& f : frames) {
    if (!schedule.accepted.contains(f.id)) continue;
    auto it = schedule.offsets.find(f.id);
    if (it == schedule.offsets.end())
      throw std::invalid_argument("schedule: accepted frame '" + f.id + "' has no offsets");
    std::vector<Ns> offsets;
    offsets.reserve(f.route.links.size());
    for (const std::string& lid : f.route.links) {
      auto oit = it->second.find(lid);
      if (oit == it->second.end())
        throw std::invalid_argument("schedule: frame '" + f.id + "' missing offset for link '" +
                                    lid + "'");
      offsets.push_back(oit->second);
    }
    out.commit(f, topo, offsets);
  }
  return out;
}

void BlockedIntervals::add(Ns first, Ns last) {
  if (first > last) return;
  intervals_.emplace_back(first, last);
  normalized_ = false;
}

void BlockedIntervals::add_pattern(const LinkBusyPattern& busy, Ns cand_period, Ns cand_duration,
                                   Ns lo, Ns hi) {
  if (lo > hi || busy.duration <= 0 || cand_duration <= 0) return;
  const Ns g = std::gcd(cand_period, busy.period);
  const Ns first0 = busy.offset - cand_duration + 1;
  const Ns last0 = busy.offset + busy.duration - 1;
  if (last0 - first0 + 1 >= g) {
    // The blocked band wraps the whole residue ring: no offset clears it.
    add(lo, hi);
    return;
  }
  const Ns m_lo = div_ceil(lo - last0, g);
  const Ns m_hi = div_floor(hi - first0, g);
  for (Ns m = m_lo; m <= m_hi; ++m)
    add(std::max(lo, first0 + m * g), std::min(hi, last0 + m * g));
}

void BlockedIntervals::normalize() {
  if (normalized_) return;
  std::sort(intervals_.begin(), intervals_.end());
  std::vector<std::pair<Ns, Ns>> merged;
  merged.reserve(intervals_.size());
  for (const auto& iv : intervals_) {
    if (!merged.empty() && iv.first <= merged.back().second + 1)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }
  intervals_ = std::move(merged);
  normalized_ = true;
}

std::optional<Ns> BlockedIntervals::first_clear_jump(Ns lo, Ns hi) const {
  if (!normalized_) throw std::logic_error("BlockedIntervals: normalize() first");
  Ns x = lo;
  for (const auto& [a, b] : intervals_) {
    if (b < x) continue;
    if (a > x) break;
    x = b + 1;
  }
  return x <= hi ? std::optional<Ns>(x) : std::nullopt;
}

std::optional<Ns> BlockedIntervals::first_clear_stepped(Ns anchor, Ns step, Ns lo, Ns hi) const {
  if (!normalized_) throw std::logic_error("BlockedIntervals: normalize() first");
  if (step <= 0) throw std::invalid_argument("BlockedIntervals: step must be positive");
  Ns k = anchor >= lo ? 0 : div_ceil(lo - anchor, step);
  Ns x = anchor + k * step;
  for (const auto& [a, b] : intervals_) {
    if (b < x) continue;
    if (a > x) break;
    k = div_ceil(b + 1 - anchor, step);
    x = anchor + k * step;
  }
  return x <= hi ? std::optional<Ns>(x) : std::nullopt;
}

bool BlockedIntervals::blocked(Ns x) const {
  if (!normalized_) throw std::logic_error("BlockedIntervals: normalize() first");
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](Ns v, const std::pair<Ns, Ns>& iv) { return v < iv.first; });
  if (it == intervals_.begin()) return false;
  --it;
  return it->second >= x;
}

}  // namespace mcfs
