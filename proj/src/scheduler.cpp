#include "mcfs/scheduler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace mcfs {

namespace {

struct RouteTiming {
  std::vector<Ns> durations;   // per link
  std::vector<Ns> prop_delays; // per link
  std::vector<Ns> latest;      // latest feasible start per link under the deadline
};

RouteTiming route_timing(const AggregateFrame& frame, const Topology& topo) {
  RouteTiming t;
  for (const std::string& lid : frame.route.links) {
    const Link& link = topo.link_at(lid);
    t.durations.push_back(
        transmission_duration(frame.payload, kFrameOverheadBytes, link.rate_bps));
    t.prop_delays.push_back(link.prop_delay_ns);
  }
  t.latest.resize(t.durations.size());
  Ns tail = 0;
  for (std::size_t i = t.durations.size(); i-- > 0;) {
    tail += t.durations[i] + t.prop_delays[i];
    t.latest[i] = frame.deadline - tail;
  }
  return t;
}

// Diagnostic only: locate one overlapping instance pair, scanning two cycles
// to cover conflicts that straddle the lcm boundary.
void locate_conflict_instances(Ns period_a, Ns offset_a, Ns dur_a, Ns period_b, Ns offset_b,
                               Ns dur_b, ConstraintViolation& v) {
  Ns cycle = 0;
  try {
    cycle = checked_lcm(period_a, period_b);
  } catch (const std::overflow_error&) {
    return;
  }
  const Ns count_a = cycle / period_a;
  const Ns count_b = 2 * (cycle / period_b);
  if (count_a * count_b > 65536) return;
  for (Ns a = 0; a < count_a; ++a) {
    const Ns sa = offset_a + a * period_a;
    for (Ns b = 0; b < count_b; ++b) {
      const Ns sb = offset_b + b * period_b;
      if (sa < sb + dur_b && sb < sa + dur_a) {
        v.instance = a;
        v.other_instance = b;
        v.at_ns = std::max(sa, sb);
        return;
      }
    }
  }
}

bool has_noncritical_member(const AggregateFrame& frame, const FlowIndex& flows) {
  for (const std::string& mid : frame.members)
    if (!flows.at(mid).is_critical()) return true;
  return false;
}

class Mcfs2lRun {
 public:
  Mcfs2lRun(std::span<const Flow> flows, const Topology& topo, const SchedulerConfig& cfg)
      : flows_(flows), index_(flows), topo_(topo), cfg_(cfg) {
    out_.algorithm = "mcfs2l";
  }

  ScheduleResult run(std::span<const AggregateFrame> frames, const AggregationOptions& reagg) {
    primary_pass(frames);
    reassembly_pass(reagg);
    return std::move(out_);
  }

 private:
  void accept(const AggregateFrame& frame, const std::vector<Ns>& offsets) {
    committed_.commit(frame, topo_, offsets);
    out_.schedule.accepted.insert(frame.id);
    auto& per_link = out_.schedule.offsets[frame.id];
    for (std::size_t i = 0; i < frame.route.links.size(); ++i)
      per_link[frame.route.links[i]] = offsets[i];
    out_.frames.push_back(frame);
  }

  void reject(const AggregateFrame& frame, const ConstraintViolation& why) {
    out_.schedule.rejected.insert(frame.id);
    out_.frames.push_back(frame);
    for (const std::string& mid : frame.members)
      out_.rejected_flows.push_back({mid, std::string(to_string(why.kind))});
  }

  void primary_pass(std::span<const AggregateFrame> frames) {
    for (const AggregateFrame& original :
         order_frames({frames.begin(), frames.end()})) {
      AggregateFrame cur = original;
      for (;;) {
        auto res = find_offsets(cur, committed_, topo_, cfg_);
        if (auto* offsets = std::get_if<std::vector<Ns>>(&res)) {
          accept(cur, *offsets);
          break;
        }
        if (!has_noncritical_member(cur, index_)) {
          // Critical-only residual that still fails: reject all members.
          reject(cur, std::get<ConstraintViolation>(res));
          break;
        }
        DisaggregateStep step = disaggregate_step(cur, index_);
        extracted_.push_back(step.extracted);
        event_index_[step.extracted.id] = out_.reassembly.size();
        out_.reassembly.push_back({step.extracted.id, cur.id, ""});
        if (!step.reduced.has_value()) break;  // fully dissolved, nothing to reject
        cur = *step.reduced;
      }
    }
  }

  void reassembly_pass(AggregationOptions reagg) {
    if (extracted_.empty()) return;
    reagg.id_prefix = "ragg-";
    AggregationResult re = aggregate_all(extracted_, reagg);
    for (const FlowRejection& r : re.oversized) out_.rejected_flows.push_back(r);
    for (const AggregateFrame& g : order_frames(std::move(re.frames))) {
      auto res = find_offsets(g, committed_, topo_, cfg_);
      if (auto* offsets = std::get_if<std::vector<Ns>>(&res)) {
        accept(g, *offsets);
        mark_rescheduled(g.members, g.id);
        continue;
      }
      if (g.members.size() == 1) {
        reject(g, std::get<ConstraintViolation>(res));
        mark_rescheduled(g.members, g.id);
        continue;
      }
      // Split into singletons and retry each once before rejection.
      std::vector<AggregateFrame> solos;
      for (const std::string& mid : g.members) {
        const Flow& f = index_.at(mid);
        solos.push_back({"solo-" + f.id, {f.id}, f.period, f.deadline, f.payload, f.route,
                         f.is_critical()});
      }
      for (const AggregateFrame& s : order_frames(std::move(solos))) {
        auto res2 = find_offsets(s, committed_, topo_, cfg_);
        if (auto* offsets = std::get_if<std::vector<Ns>>(&res2))
          accept(s, *offsets);
        else
          reject(s, std::get<ConstraintViolation>(res2));
        mark_rescheduled(s.members, s.id);
      }
    }
  }

  void mark_rescheduled(const std::vector<std::string>& member_ids, const std::string& frame_id) {
    for (const std::string& mid : member_ids) {
      auto it = event_index_.find(mid);
      if (it != event_index_.end()) out_.reassembly[it->second].rescheduled_as = frame_id;
    }
  }

  std::span<const Flow> flows_;
  FlowIndex index_;
  const Topology& topo_;
  const SchedulerConfig& cfg_;
  CommittedLinks committed_;
  ScheduleResult out_;
  std::vector<Flow> extracted_;
  std::unordered_map<std::string, std::size_t> event_index_;
};

}  // namespace

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Deadline: return "deadline";
    case ConstraintKind::Forwarding: return "forwarding";
    case ConstraintKind::LinkConflict: return "link_conflict";
  }
  return "unknown";
}

std::string ConstraintViolation::message() const {
  std::string msg = std::string(to_string(kind)) + " violation: frame '" + frame_id + "'";
  if (!link_id.empty()) msg += " on link '" + link_id + "'";
  if (!other_frame.empty()) msg += " vs frame '" + other_frame + "'";
  if (instance >= 0) msg += " (instance " + std::to_string(instance) + ")";
  if (at_ns >= 0) msg += " at " + std::to_string(at_ns) + " ns";
  return msg;
}

std::vector<AggregateFrame> order_frames(std::vector<AggregateFrame> frames) {
  std::sort(frames.begin(), frames.end(), [](const AggregateFrame& a, const AggregateFrame& b) {
    if (a.deadline != b.deadline) return a.deadline < b.deadline;
    if (a.contains_critical != b.contains_critical) return a.contains_critical;
    return a.id < b.id;
  });
  return frames;
}

std::optional<ConstraintViolation> check_constraints(const AggregateFrame& frame,
                                                     std::span<const Ns> offsets,
                                                     const CommittedLinks& committed,
                                                     const Topology& topo) {
  const std::size_t n = frame.route.links.size();
  if (offsets.size() != n)
    throw std::invalid_argument("check_constraints: offsets do not cover the route");
  const RouteTiming timing = route_timing(frame, topo);

  // (a) deadline: arrival at the destination within the relative deadline.
  const Ns finish = offsets[n - 1] + timing.durations[n - 1] + timing.prop_delays[n - 1];
  if (finish > frame.deadline) {
    ConstraintViolation v;
    v.kind = ConstraintKind::Deadline;
    v.frame_id = frame.id;
    v.link_id = frame.route.links[n - 1];
    v.at_ns = finish;
    return v;
  }

  // (b) forwarding: a hop may start only after the previous hop delivered.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Ns ready = offsets[i] + timing.durations[i] + timing.prop_delays[i];
    if (offsets[i + 1] < ready) {
      ConstraintViolation v;
      v.kind = ConstraintKind::Forwarding;
      v.frame_id = frame.id;
      v.link_id = frame.route.links[i + 1];
      v.at_ns = offsets[i + 1];
      return v;
    }
  }

  // (c) link: no two frames may occupy a link at once, checked pairwise
  // against every committed frame sharing the link.
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<LinkBusyPattern>* busy = committed.on_link(frame.route.links[i]);
    if (busy == nullptr) continue;
    for (const LinkBusyPattern& g : *busy) {
      if (g.frame_id == frame.id) continue;
      if (patterns_conflict(frame.period, offsets[i], timing.durations[i], g.period, g.offset,
                            g.duration)) {
        ConstraintViolation v;
        v.kind = ConstraintKind::LinkConflict;
        v.frame_id = frame.id;
        v.link_id = frame.route.links[i];
        v.other_frame = g.frame_id;
        locate_conflict_instances(frame.period, offsets[i], timing.durations[i], g.period,
                                  g.offset, g.duration, v);
        return v;
      }
    }
  }
  return std::nullopt;
}

std::variant<std::vector<Ns>, ConstraintViolation> find_offsets(const AggregateFrame& frame,
                                                                const CommittedLinks& committed,
                                                                const Topology& topo,
                                                                const SchedulerConfig& cfg) {
  if (cfg.step <= 0) throw std::invalid_argument("find_offsets: step must be positive");
  if (frame.route.links.empty())
    throw std::invalid_argument("find_offsets: frame '" + frame.id + "' has an empty route");
  const RouteTiming timing = route_timing(frame, topo);

  ConstraintViolation fail;
  fail.kind = ConstraintKind::Deadline;
  fail.frame_id = frame.id;

  std::vector<Ns> offsets(frame.route.links.size());
  Ns earliest = 0;
  for (std::size_t i = 0; i < frame.route.links.size(); ++i) {
    const std::string& lid = frame.route.links[i];
    if (timing.latest[i] < earliest) {
      fail.link_id = lid;
      return fail;
    }
    BlockedIntervals blocked;
    if (const std::vector<LinkBusyPattern>* busy = committed.on_link(lid)) {
      for (const LinkBusyPattern& g : *busy)
        blocked.add_pattern(g, frame.period, timing.durations[i], earliest, timing.latest[i]);
    }
    blocked.normalize();
    const std::optional<Ns> found =
        cfg.fast_forward ? blocked.first_clear_jump(earliest, timing.latest[i])
                         : blocked.first_clear_stepped(earliest, cfg.step, earliest,
                                                       timing.latest[i]);
    if (!found.has_value()) {
      fail.link_id = lid;
      return fail;
    }
    offsets[i] = *found;
    earliest = *found + timing.durations[i] + timing.prop_delays[i];
  }
  return offsets;
}

DisaggregateStep disaggregate_step(const AggregateFrame& frame, const FlowIndex& flows) {
  const Flow* victim = nullptr;
  for (const std::string& mid : frame.members) {
    const Flow& f = flows.at(mid);
    if (f.is_critical()) continue;
    if (victim == nullptr || f.payload > victim->payload ||
        (f.payload == victim->payload && f.id < victim->id))
      victim = &f;
  }
  if (victim == nullptr)
    throw std::invalid_argument("disaggregate_step: frame '" + frame.id +
                                "' has no non-critical member");

  std::vector<std::string> remaining;
  for (const std::string& mid : frame.members)
    if (mid != victim->id) remaining.push_back(mid);

  DisaggregateStep out{std::nullopt, *victim};
  if (!remaining.empty())
    out.reduced = build_aggregate_from_members(frame.id, remaining, flows);
  return out;
}

ScheduleResult schedule_mcfs2l(std::span<const AggregateFrame> frames,
                               std::span<const Flow> flows, const Topology& topo,
                               const SchedulerConfig& cfg, const AggregationOptions& reagg) {
  Mcfs2lRun run(flows, topo, cfg);
  return run.run(frames, reagg);
}

}  // namespace mcfs
