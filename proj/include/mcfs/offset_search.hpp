#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcfs/model.hpp"

namespace mcfs {

// Periodic footprint of one committed frame on one link: busy windows
// [offset + k*period, offset + k*period + duration) for every k >= 0.
struct LinkBusyPattern {
  std::string frame_id;
  Ns period = 0;
  Ns offset = 0;
  Ns duration = 0;
};

// True iff the two periodic window families ever overlap. Closed form of
// checking every instance pair inside lcm(period_a, period_b), including
// pairs that straddle the cycle boundary.
bool patterns_conflict(Ns period_a, Ns offset_a, Ns duration_a, Ns period_b, Ns offset_b,
                       Ns duration_b);

Ns div_floor(Ns a, Ns b);
Ns div_ceil(Ns a, Ns b);

// Send state of already-scheduled frames, indexed by link.
class CommittedLinks {
 public:
  // offsets[i] belongs to frame.route.links[i]
  void commit(const AggregateFrame& frame, const Topology& topo, std::span<const Ns> offsets);
  const std::vector<LinkBusyPattern>* on_link(const std::string& link_id) const;

  static CommittedLinks from_schedule(const Schedule& schedule,
                                      std::span<const AggregateFrame> frames,
                                      const Topology& topo);

 private:
  std::unordered_map<std::string, std::vector<LinkBusyPattern>> by_link_;
};

// Union of closed integer intervals [first, last] of candidate offsets that
// collide with committed windows.
class BlockedIntervals {
 public:
  void add(Ns first, Ns last);

  // Adds every x in [lo, hi] for which a window [x, x + cand_duration) of a
  // frame with period cand_period overlaps busy's window family.
  void add_pattern(const LinkBusyPattern& busy, Ns cand_period, Ns cand_duration, Ns lo, Ns hi);

  void normalize();

  // Earliest clear x in [lo, hi], jumping to the end of each blocking window.
  std::optional<Ns> first_clear_jump(Ns lo, Ns hi) const;

  // Earliest clear x = anchor + k*step (k >= 0) within [lo, hi]. Exactly the
  // point a unit-stepped scan would stop at.
  std::optional<Ns> first_clear_stepped(Ns anchor, Ns step, Ns lo, Ns hi) const;

  bool blocked(Ns x) const;
  const std::vector<std::pair<Ns, Ns>>& intervals() const { return intervals_; }

 private:
  std::vector<std::pair<Ns, Ns>> intervals_;
  bool normalized_ = true;
};

}  // namespace mcfs
