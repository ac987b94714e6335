#pragma once

#include <span>

#include "mcfs/scheduler.hpp"

namespace mcfs {

// No-wait time-triggered baseline: each flow gets the smallest start offset
// (unit-stepped from 0) whose back-to-back hop chain is conflict-free and
// meets the deadline. Flows are processed deadline ascending.
ScheduleResult schedule_nwtt(std::span<const Flow> flows, const Topology& topo,
                             const SchedulerConfig& cfg);

// Randomized no-wait baseline: start offsets are sampled uniformly without
// replacement from the unit grid [0, deadline - no-wait latency] (or
// [0, deadline] with cfg.rnwtt_raw_deadline_range); the first conflict-free
// candidate wins. Deterministic given cfg.rng_seed.
ScheduleResult schedule_rnwtt(std::span<const Flow> flows, const Topology& topo,
                              const SchedulerConfig& cfg);

}  // namespace mcfs
