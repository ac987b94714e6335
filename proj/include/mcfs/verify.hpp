#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcfs/scheduler.hpp"

namespace mcfs {

struct RunMetrics {
  std::string algorithm;
  int n_frames = 0;
  std::uint64_t seed = 0;
  double critical_acceptance = 0.0;
  double noncritical_acceptance = 0.0;
  double bandwidth_utilization = 0.0;
  double execution_time_s = 0.0;
};

struct MetricsOptions {
  // The literal utilization formula sums transmission times across links and
  // instances and divides by the hyperperiod only, so values may exceed 1 on
  // multi-link topologies. This divides by the link count instead.
  bool normalize_per_link = false;
};

struct GclEntry {
  std::string link_id;  // egress port
  int queue = 7;
  Ns start = 0;
  Ns end = 0;
  bool open = false;

  bool operator==(const GclEntry&) const = default;
};

// Every window of every accepted frame over [0, horizon); horizon 0 means the
// hyperperiod of the accepted frames.
std::vector<TransmissionWindow> materialize_windows(const Schedule& schedule,
                                                    std::span<const AggregateFrame> frames,
                                                    const Topology& topo, Ns horizon = 0);

// Independent replay oracle: materializes all windows and checks link
// disjointness by interval sweep, plus per-instance forwarding chains and
// absolute deadlines. Shares no conflict-checking code with the scheduler.
// Returns every violation found, sorted by (link, time, frame).
std::vector<ConstraintViolation> replay_verify(const Schedule& schedule,
                                               std::span<const AggregateFrame> frames,
                                               const Topology& topo);

// Acceptance ratios are over original flows, resolved through the final
// frames' member lists. Call only after replay_verify reports no violations.
RunMetrics compute_metrics(const ScheduleResult& result, std::span<const Flow> original_flows,
                           const Topology& topo, double execution_time_s,
                           const MetricsOptions& opts = {}, std::uint64_t seed = 0);

// One open entry per transmission window on queue 7 of the egress port; the
// rest of the cycle is closed. Cycle length = hyperperiod of the given
// frames. Call only after replay_verify reports no violations.
std::vector<GclEntry> emit_gcl(const Schedule& schedule, std::span<const AggregateFrame> frames,
                               const Topology& topo);

}  // namespace mcfs
