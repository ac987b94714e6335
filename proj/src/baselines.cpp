#include "mcfs/baselines.hpp"

#include <random>
#include <stdexcept>
#include <unordered_map>

namespace mcfs {

namespace {

struct NoWaitChain {
  std::vector<Ns> durations;
  std::vector<Ns> lead;  // start of hop i relative to the flow start offset
  Ns total_latency = 0;  // source send to destination arrival
};

NoWaitChain no_wait_chain(const AggregateFrame& frame, const Topology& topo) {
  NoWaitChain c;
  Ns at = 0;
  for (const std::string& lid : frame.route.links) {
    const Link& link = topo.link_at(lid);
    const Ns dur = transmission_duration(frame.payload, kFrameOverheadBytes, link.rate_bps);
    c.durations.push_back(dur);
    c.lead.push_back(at);
    at += dur + link.prop_delay_ns;
  }
  c.total_latency = at;
  return c;
}

// Blocked start offsets for the whole no-wait chain: hop i occupies
// [phi + lead[i], phi + lead[i] + dur[i]) on its link.
BlockedIntervals chain_blocked(const AggregateFrame& frame, const NoWaitChain& chain,
                               const CommittedLinks& committed, Ns lo, Ns hi) {
  BlockedIntervals blocked;
  for (std::size_t i = 0; i < frame.route.links.size(); ++i) {
    const std::vector<LinkBusyPattern>* busy = committed.on_link(frame.route.links[i]);
    if (busy == nullptr) continue;
    for (const LinkBusyPattern& g : *busy) {
      LinkBusyPattern shifted = g;
      shifted.offset -= chain.lead[i];
      blocked.add_pattern(shifted, frame.period, chain.durations[i], lo, hi);
    }
  }
  blocked.normalize();
  return blocked;
}

class BaselineRun {
 public:
  BaselineRun(std::string algorithm, const Topology& topo, const SchedulerConfig& cfg)
      : topo_(topo), cfg_(cfg) {
    out_.algorithm = std::move(algorithm);
  }

  void accept(const AggregateFrame& frame, const NoWaitChain& chain, Ns phi) {
    std::vector<Ns> offsets;
    offsets.reserve(chain.lead.size());
    for (Ns lead : chain.lead) offsets.push_back(phi + lead);
    committed_.commit(frame, topo_, offsets);
    out_.schedule.accepted.insert(frame.id);
    auto& per_link = out_.schedule.offsets[frame.id];
    for (std::size_t i = 0; i < frame.route.links.size(); ++i)
      per_link[frame.route.links[i]] = offsets[i];
    out_.frames.push_back(frame);
  }

  void reject(const AggregateFrame& frame) {
    out_.schedule.rejected.insert(frame.id);
    out_.frames.push_back(frame);
    for (const std::string& mid : frame.members)
      out_.rejected_flows.push_back({mid, "deadline"});
  }

  const Topology& topo_;
  const SchedulerConfig& cfg_;
  CommittedLinks committed_;
  ScheduleResult out_;
};

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

}  // namespace

ScheduleResult schedule_nwtt(std::span<const Flow> flows, const Topology& topo,
                             const SchedulerConfig& cfg) {
  if (cfg.step <= 0) throw std::invalid_argument("schedule_nwtt: step must be positive");
  BaselineRun run("nwtt", topo, cfg);
  for (const AggregateFrame& frame : order_frames(as_singleton_frames(flows))) {
    const NoWaitChain chain = no_wait_chain(frame, topo);
    const Ns bound = frame.deadline - chain.total_latency;
    if (bound < 0) {
      run.reject(frame);
      continue;
    }
    const BlockedIntervals blocked = chain_blocked(frame, chain, run.committed_, 0, bound);
    const std::optional<Ns> phi = blocked.first_clear_stepped(0, cfg.step, 0, bound);
    if (phi.has_value())
      run.accept(frame, chain, *phi);
    else
      run.reject(frame);
  }
  return std::move(run.out_);
}

ScheduleResult schedule_rnwtt(std::span<const Flow> flows, const Topology& topo,
                              const SchedulerConfig& cfg) {
  if (cfg.step <= 0) throw std::invalid_argument("schedule_rnwtt: step must be positive");
  BaselineRun run("rnwtt", topo, cfg);
  std::mt19937_64 rng(cfg.rng_seed);
  for (const AggregateFrame& frame : order_frames(as_singleton_frames(flows))) {
    const NoWaitChain chain = no_wait_chain(frame, topo);
    const Ns latency_bound = frame.deadline - chain.total_latency;
    const Ns range_max = cfg.rnwtt_raw_deadline_range ? frame.deadline : latency_bound;
    if (range_max < 0) {
      run.reject(frame);
      continue;
    }
    BlockedIntervals blocked = chain_blocked(frame, chain, run.committed_, 0, range_max);
    if (cfg.rnwtt_raw_deadline_range && latency_bound < range_max) {
      // Candidates past the latency bound can never meet the deadline.
      blocked.add(std::max<Ns>(0, latency_bound + 1), range_max);
      blocked.normalize();
    }

    const std::int64_t grid_size = range_max / cfg.step + 1;
    std::int64_t attempts = grid_size;
    if (cfg.rnwtt_max_attempts.has_value())
      attempts = std::min(attempts, std::max<std::int64_t>(0, *cfg.rnwtt_max_attempts));

    // Lazy Fisher-Yates: a uniform random permutation of the grid, consumed
    // only as far as needed.
    std::unordered_map<std::int64_t, std::int64_t> perm;
    bool accepted = false;
    for (std::int64_t t = 0; t < attempts; ++t) {
      const std::int64_t j =
          t + static_cast<std::int64_t>(draw_below(rng, static_cast<std::uint64_t>(grid_size - t)));
      auto value_of = [&perm](std::int64_t k) {
        auto it = perm.find(k);
        return it == perm.end() ? k : it->second;
      };
      const std::int64_t candidate_index = value_of(j);
      perm[j] = value_of(t);
      const Ns phi = candidate_index * cfg.step;
      if (!blocked.blocked(phi)) {
        run.accept(frame, chain, phi);
        accepted = true;
        break;
      }
    }
    if (!accepted) run.reject(frame);
  }
  return std::move(run.out_);
}

}  // namespace mcfs
