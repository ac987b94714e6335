#include "mcfs/aggregation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace mcfs {

namespace {

std::string route_key(const Route& r) {
  std::string key;
  for (const std::string& l : r.links) {
    key += l;
    key += '|';
  }
  return key;
}

bool admits(const Cluster& c, const Flow& f, const AggregationOptions& opts) {
  if (c.total_payload + f.payload > opts.max_payload) return false;
  for (Ns p : c.periods) {
    if (opts.equal_periods_only) {
      if (p != f.period) return false;
    } else if (f.period % p != 0 && p % f.period != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Cluster> cluster_flows(std::span<const Flow> flows, const AggregationOptions& opts,
                                   std::vector<FlowRejection>* oversized) {
  // Deterministic group order: (src, dst, route).
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const Flow*>> groups;
  for (const Flow& f : flows) {
    if (f.payload > opts.max_payload) {
      if (oversized != nullptr) oversized->push_back({f.id, "oversize"});
      continue;
    }
    groups[{f.src, f.dst, route_key(f.route)}].push_back(&f);
  }

  std::vector<Cluster> out;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](const Flow* a, const Flow* b) {
      if (a->payload != b->payload) return a->payload > b->payload;
      return a->id < b->id;
    });
    const std::size_t group_begin = out.size();
    for (const Flow* f : members) {
      bool placed = false;
      for (std::size_t i = group_begin; i < out.size(); ++i) {
        if (admits(out[i], *f, opts)) {
          out[i].flow_ids.push_back(f->id);
          out[i].total_payload += f->payload;
          out[i].periods.push_back(f->period);
          placed = true;
          break;
        }
      }
      if (!placed) out.push_back({{f->id}, f->payload, {f->period}});
    }
  }
  return out;
}

AggregateFrame build_aggregate_from_members(std::string id,
                                            std::span<const std::string> member_ids,
                                            const FlowIndex& flows) {
  if (member_ids.empty())
    throw std::invalid_argument("build_aggregate: member list must be non-empty");
  AggregateFrame out;
  out.id = std::move(id);
  const Flow& first = flows.at(member_ids.front());
  out.route = first.route;
  out.period = 0;
  out.deadline = first.deadline;
  for (const std::string& mid : member_ids) {
    const Flow& f = flows.at(mid);
    if (f.route != first.route || f.src != first.src || f.dst != first.dst)
      throw std::invalid_argument("build_aggregate: members do not share (src, dst, route)");
    out.members.push_back(mid);
    out.period = out.period == 0 ? f.period : std::gcd(out.period, f.period);
    out.deadline = std::min(out.deadline, f.deadline);
    out.payload += f.payload;
    out.contains_critical = out.contains_critical || f.is_critical();
  }
  return out;
}

AggregateFrame build_aggregate(const Cluster& cluster, const FlowIndex& flows, std::string id) {
  return build_aggregate_from_members(std::move(id), cluster.flow_ids, flows);
}

AggregationResult aggregate_all(std::span<const Flow> flows, const AggregationOptions& opts) {
  AggregationResult out;
  out.clusters = cluster_flows(flows, opts, &out.oversized);
  const FlowIndex index(flows);
  out.frames.reserve(out.clusters.size());
  char buf[32];
  for (std::size_t i = 0; i < out.clusters.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%04zu", i + 1);
    out.frames.push_back(build_aggregate(out.clusters[i], index, opts.id_prefix + buf));
  }
  return out;
}

std::vector<std::string> aggregate_frame_violations(const AggregateFrame& frame,
                                                    const FlowIndex& flows) {
  std::vector<std::string> out;
  if (frame.members.empty()) {
    out.push_back("members: must be non-empty");
    return out;
  }
  std::vector<Ns> periods;
  Ns gcd_period = 0;
  Ns min_deadline = INT64_MAX;
  std::int64_t payload_sum = 0;
  bool any_critical = false;
  for (const std::string& mid : frame.members) {
    const Flow* f = flows.find(mid);
    if (f == nullptr) {
      out.push_back("members: unknown flow '" + mid + "'");
      return out;
    }
    periods.push_back(f->period);
    gcd_period = gcd_period == 0 ? f->period : std::gcd(gcd_period, f->period);
    min_deadline = std::min(min_deadline, f->deadline);
    payload_sum += f->payload;
    any_critical = any_critical || f->is_critical();
    if (f->route != frame.route || f->src != flows.at(frame.members.front()).src ||
        f->dst != flows.at(frame.members.front()).dst)
      out.push_back("members: flow '" + mid + "' does not share (src, dst, route)");
  }
  if (!is_harmonic(periods)) out.push_back("members: period set is not harmonic");
  if (frame.period != gcd_period) out.push_back("period: not the gcd of member periods");
  if (frame.deadline != min_deadline) out.push_back("deadline: not the min of member deadlines");
  if (frame.payload != payload_sum) out.push_back("payload: not the sum of member payloads");
  if (frame.payload > kMaxPayloadBytes) out.push_back("payload: exceeds 1500 bytes");
  if (frame.contains_critical != any_critical)
    out.push_back("contains_critical: does not match members");
  return out;
}

std::vector<AggregateFrame> as_singleton_frames(std::span<const Flow> flows) {
  std::vector<AggregateFrame> out;
  out.reserve(flows.size());
  for (const Flow& f : flows)
    out.push_back({f.id, {f.id}, f.period, f.deadline, f.payload, f.route, f.is_critical()});
  return out;
}

}  // namespace mcfs
