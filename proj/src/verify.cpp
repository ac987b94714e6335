#include "mcfs/verify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace mcfs {

namespace {

Ns accepted_hyperperiod(const Schedule& schedule, std::span<const AggregateFrame> frames) {
  Ns h = 0;
  for (const AggregateFrame& f : frames) {
    if (!schedule.accepted.contains(f.id)) continue;
    h = h == 0 ? f.period : checked_lcm(h, f.period);
  }
  return h;
}

std::vector<Ns> route_offsets(const Schedule& schedule, const AggregateFrame& frame) {
  auto it = schedule.offsets.find(frame.id);
  if (it == schedule.offsets.end())
    throw std::invalid_argument("replay: accepted frame '" + frame.id + "' has no offsets");
  std::vector<Ns> out;
  out.reserve(frame.route.links.size());
  for (const std::string& lid : frame.route.links) {
    auto oit = it->second.find(lid);
    if (oit == it->second.end())
      throw std::invalid_argument("replay: frame '" + frame.id + "' missing offset for link '" +
                                  lid + "'");
    out.push_back(oit->second);
  }
  return out;
}

}  // namespace

std::vector<TransmissionWindow> materialize_windows(const Schedule& schedule,
                                                    std::span<const AggregateFrame> frames,
                                                    const Topology& topo, Ns horizon) {
  if (horizon == 0) horizon = accepted_hyperperiod(schedule, frames);
  std::vector<TransmissionWindow> out;
  for (const AggregateFrame& f : frames) {
    if (!schedule.accepted.contains(f.id)) continue;
    const std::vector<Ns> offsets = route_offsets(schedule, f);
    const Ns instances = horizon / f.period;
    for (std::size_t i = 0; i < f.route.links.size(); ++i) {
      const Link& link = topo.link_at(f.route.links[i]);
      const Ns dur = transmission_duration(f.payload, kFrameOverheadBytes, link.rate_bps);
      for (Ns k = 0; k < instances; ++k) {
        const Ns start = k * f.period + offsets[i];
        out.push_back({link.id, f.id, k, start, start + dur});
      }
    }
  }
  return out;
}

std::vector<ConstraintViolation> replay_verify(const Schedule& schedule,
                                               std::span<const AggregateFrame> frames,
                                               const Topology& topo) {
  for (const std::string& id : schedule.accepted)
    if (schedule.rejected.contains(id))
      throw std::invalid_argument("replay: frame '" + id + "' is both accepted and rejected");

  std::unordered_set<std::string> known;
  for (const AggregateFrame& f : frames) known.insert(f.id);
  for (const std::string& id : schedule.accepted)
    if (!known.contains(id))
      throw std::invalid_argument("replay: accepted frame '" + id + "' is not a known frame");

  std::vector<ConstraintViolation> out;
  const Ns horizon = accepted_hyperperiod(schedule, frames);
  if (horizon == 0) return out;

  // Per-frame, per-instance forwarding chains and absolute deadlines.
  for (const AggregateFrame& f : frames) {
    if (!schedule.accepted.contains(f.id)) continue;
    const std::vector<Ns> offsets = route_offsets(schedule, f);
    const std::size_t hops = f.route.links.size();
    const Ns instances = horizon / f.period;
    for (Ns k = 0; k < instances; ++k) {
      const Ns release = k * f.period;
      Ns prev_arrival = release;  // released at the source at k*period
      Ns finish = release;
      for (std::size_t i = 0; i < hops; ++i) {
        const Link& link = topo.link_at(f.route.links[i]);
        const Ns dur = transmission_duration(f.payload, kFrameOverheadBytes, link.rate_bps);
        const Ns start = release + offsets[i];
        if (i > 0 && start < prev_arrival) {
          ConstraintViolation v;
          v.kind = ConstraintKind::Forwarding;
          v.frame_id = f.id;
          v.link_id = link.id;
          v.instance = k;
          v.at_ns = start;
          out.push_back(v);
        }
        prev_arrival = start + dur + link.prop_delay_ns;
        finish = prev_arrival;
      }
      if (finish > release + f.deadline) {
        ConstraintViolation v;
        v.kind = ConstraintKind::Deadline;
        v.frame_id = f.id;
        v.link_id = f.route.links.back();
        v.instance = k;
        v.at_ns = finish;
        out.push_back(v);
      }
    }
  }

  // Link disjointness by sweep over materialized windows.
  std::map<std::string, std::vector<TransmissionWindow>> by_link;
  for (TransmissionWindow& w : materialize_windows(schedule, frames, topo, horizon))
    by_link[w.link_id].push_back(std::move(w));
  for (auto& [link_id, windows] : by_link) {
    std::sort(windows.begin(), windows.end(),
              [](const TransmissionWindow& a, const TransmissionWindow& b) {
                if (a.start != b.start) return a.start < b.start;
                if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
                return a.instance < b.instance;
              });
    for (std::size_t i = 0; i < windows.size(); ++i) {
      for (std::size_t j = i + 1; j < windows.size() && windows[j].start < windows[i].end; ++j) {
        ConstraintViolation v;
        v.kind = ConstraintKind::LinkConflict;
        v.frame_id = windows[i].frame_id;
        v.other_frame = windows[j].frame_id;
        v.link_id = link_id;
        v.instance = windows[i].instance;
        v.other_instance = windows[j].instance;
        v.at_ns = windows[j].start;
        out.push_back(v);
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const ConstraintViolation& a, const ConstraintViolation& b) {
    if (a.link_id != b.link_id) return a.link_id < b.link_id;
    if (a.at_ns != b.at_ns) return a.at_ns < b.at_ns;
    if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

RunMetrics compute_metrics(const ScheduleResult& result, std::span<const Flow> original_flows,
                           const Topology& topo, double execution_time_s,
                           const MetricsOptions& opts, std::uint64_t seed) {
  std::unordered_set<std::string> accepted_flows;
  for (const AggregateFrame& f : result.frames) {
    if (!result.schedule.accepted.contains(f.id)) continue;
    for (const std::string& mid : f.members) accepted_flows.insert(mid);
  }

  std::int64_t total_critical = 0, total_noncritical = 0;
  std::int64_t ok_critical = 0, ok_noncritical = 0;
  for (const Flow& f : original_flows) {
    const bool ok = accepted_flows.contains(f.id);
    if (f.is_critical()) {
      ++total_critical;
      ok_critical += ok ? 1 : 0;
    } else {
      ++total_noncritical;
      ok_noncritical += ok ? 1 : 0;
    }
  }

  RunMetrics m;
  m.algorithm = result.algorithm;
  m.n_frames = static_cast<int>(original_flows.size());
  m.seed = seed;
  m.critical_acceptance =
      total_critical == 0 ? 1.0
                          : static_cast<double>(ok_critical) / static_cast<double>(total_critical);
  m.noncritical_acceptance =
      total_noncritical == 0
          ? 1.0
          : static_cast<double>(ok_noncritical) / static_cast<double>(total_noncritical);

  const Ns horizon = accepted_hyperperiod(result.schedule, result.frames);
  if (horizon > 0) {
    __int128 busy = 0;
    for (const AggregateFrame& f : result.frames) {
      if (!result.schedule.accepted.contains(f.id)) continue;
      const Ns instances = horizon / f.period;
      for (const std::string& lid : f.route.links) {
        const Link& link = topo.link_at(lid);
        busy += static_cast<__int128>(instances) *
                transmission_duration(f.payload, kFrameOverheadBytes, link.rate_bps);
      }
    }
    m.bandwidth_utilization =
        static_cast<double>(static_cast<long double>(busy) / static_cast<long double>(horizon));
    if (opts.normalize_per_link && !topo.links().empty())
      m.bandwidth_utilization /= static_cast<double>(topo.links().size());
  }
  m.execution_time_s = execution_time_s;
  return m;
}

std::vector<GclEntry> emit_gcl(const Schedule& schedule, std::span<const AggregateFrame> frames,
                               const Topology& topo) {
  std::vector<GclEntry> out;
  if (frames.empty()) return out;
  Ns cycle = 0;
  for (const AggregateFrame& f : frames) cycle = cycle == 0 ? f.period : checked_lcm(cycle, f.period);

  std::map<std::string, std::vector<TransmissionWindow>> by_link;
  for (TransmissionWindow& w : materialize_windows(schedule, frames, topo, cycle))
    by_link[w.link_id].push_back(std::move(w));

  for (const Link& link : topo.links()) {
    auto& windows = by_link[link.id];
    std::sort(windows.begin(), windows.end(),
              [](const TransmissionWindow& a, const TransmissionWindow& b) {
                return a.start < b.start;
              });
    Ns t = 0;
    for (const TransmissionWindow& w : windows) {
      if (w.start > t) out.push_back({link.id, 7, t, w.start, false});
      out.push_back({link.id, 7, w.start, w.end, true});
      t = w.end;
    }
    if (t < cycle) out.push_back({link.id, 7, t, cycle, false});
  }
  return out;
}

}  // namespace mcfs
