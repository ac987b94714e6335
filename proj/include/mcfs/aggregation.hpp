#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcfs/model.hpp"

namespace mcfs {

// Per-flow rejection record; reason is one of
// deadline | forwarding | link_conflict | oversize.
struct FlowRejection {
  std::string flow_id;
  std::string reason;

  bool operator==(const FlowRejection&) const = default;
};

struct AggregationOptions {
  std::int64_t max_payload = kMaxPayloadBytes;
  // Restricts clusters to identical periods instead of harmonic ones, which
  // avoids carrying long-period payloads at the gcd rate.
  bool equal_periods_only = false;
  std::string id_prefix = "agg-";
};

// A group of flows that may be merged into one frame: same (src, dst, route),
// harmonic periods, summed payload within the cap.
struct Cluster {
  std::vector<std::string> flow_ids;  // packing order: payload desc, id asc
  std::int64_t total_payload = 0;
  std::vector<Ns> periods;  // parallel to flow_ids
};

struct AggregationResult {
  std::vector<AggregateFrame> frames;
  std::vector<Cluster> clusters;  // parallel to frames
  std::vector<FlowRejection> oversized;
};

// First-fit-decreasing packing inside each (src, dst, route) group. Flows
// whose payload exceeds max_payload are reported, never silently dropped.
std::vector<Cluster> cluster_flows(std::span<const Flow> flows, const AggregationOptions& opts,
                                   std::vector<FlowRejection>* oversized = nullptr);

// period = gcd, deadline = min, payload = sum over the given members.
AggregateFrame build_aggregate_from_members(std::string id,
                                            std::span<const std::string> member_ids,
                                            const FlowIndex& flows);

AggregateFrame build_aggregate(const Cluster& cluster, const FlowIndex& flows, std::string id);

AggregationResult aggregate_all(std::span<const Flow> flows, const AggregationOptions& opts = {});

// Invariant checker; returns human-readable violations, empty if ok.
std::vector<std::string> aggregate_frame_violations(const AggregateFrame& frame,
                                                    const FlowIndex& flows);

// One frame per flow, unmodified; frame id = flow id.
std::vector<AggregateFrame> as_singleton_frames(std::span<const Flow> flows);

}  // namespace mcfs
