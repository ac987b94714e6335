#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcfs/aggregation.hpp"
#include "mcfs/model.hpp"
#include "mcfs/offset_search.hpp"

namespace mcfs {

enum class ConstraintKind { Deadline, Forwarding, LinkConflict };

std::string_view to_string(ConstraintKind kind);

struct ConstraintViolation {
  ConstraintKind kind = ConstraintKind::Deadline;
  std::string frame_id;
  std::string link_id;       // offending link, when known
  std::string other_frame;   // conflicting frame for link conflicts
  std::int64_t instance = -1;
  std::int64_t other_instance = -1;
  Ns at_ns = -1;             // absolute time of the violation, when known

  std::string message() const;
};

struct SchedulerConfig {
  Ns step = 1'000;           // offset increment unit
  bool fast_forward = true;  // jump to the end of the blocking window
  std::uint64_t rng_seed = 1;               // consumed by R-NWTT only
  bool rnwtt_raw_deadline_range = false;    // sample within [0, deadline] verbatim
  std::optional<std::int64_t> rnwtt_max_attempts;  // default: exhaust the grid
};

struct ReassemblyEvent {
  std::string flow_id;
  std::string extracted_from;
  std::string rescheduled_as;  // empty until the flow lands in a new frame

  bool operator==(const ReassemblyEvent&) const = default;
};

struct ScheduleResult {
  std::string algorithm;
  Schedule schedule;
  std::vector<AggregateFrame> frames;  // final frames: accepted plus rejected
  std::vector<FlowRejection> rejected_flows;
  std::vector<ReassemblyEvent> reassembly;
};

// Deadline ascending; ties: critical-containing frames first, then id.
std::vector<AggregateFrame> order_frames(std::vector<AggregateFrame> frames);

// Checks (a) deadline, (b) forwarding, (c) link constraints in that order and
// returns the first violation. offsets[i] belongs to frame.route.links[i].
std::optional<ConstraintViolation> check_constraints(const AggregateFrame& frame,
                                                     std::span<const Ns> offsets,
                                                     const CommittedLinks& committed,
                                                     const Topology& topo);

// Link-by-link greedy search: each link starts at the earliest offset the
// forwarding constraint allows and advances by cfg.step (or jumps to the end
// of the blocking window with fast_forward). Unschedulable is a normal
// return, reported as the deadline violation that ended the search.
std::variant<std::vector<Ns>, ConstraintViolation> find_offsets(const AggregateFrame& frame,
                                                                const CommittedLinks& committed,
                                                                const Topology& topo,
                                                                const SchedulerConfig& cfg);

struct DisaggregateStep {
  std::optional<AggregateFrame> reduced;  // nullopt when no member remains
  Flow extracted;
};

// Removes the non-critical member with the largest payload (ties: flow id
// ascending) and rebuilds the remaining aggregate. Throws if the frame has no
// non-critical member.
DisaggregateStep disaggregate_step(const AggregateFrame& frame, const FlowIndex& flows);

// MCFS-2L: priority-ordered offset search plus dynamic reassembly. Extracted
// non-critical flows are re-aggregated (reagg options, id prefix "ragg-") and
// scheduled in a second pass; failed second-pass aggregates are split into
// singletons and retried once each.
ScheduleResult schedule_mcfs2l(std::span<const AggregateFrame> frames,
                               std::span<const Flow> flows, const Topology& topo,
                               const SchedulerConfig& cfg,
                               const AggregationOptions& reagg = {});

}  // namespace mcfs
