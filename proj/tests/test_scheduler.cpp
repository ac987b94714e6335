#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mcfs/scheduler.hpp"
#include "mcfs/workload.hpp"

using namespace mcfs;

namespace {

// Single 100 Mbps link a -> b.
Topology one_link_topology() {
  return Topology{{{"a", NodeKind::Endpoint}, {"b", NodeKind::Endpoint}},
                  {{"L", "a", "b", kDefaultLinkRateBps, 0}}};
}

// Two-hop 80 Mbps star (1 byte = 100 ns) so payloads of 8 mod 10 bytes give
// whole-microsecond durations.
Topology us_grid_topology() {
  const std::int64_t rate = 80'000'000;
  return Topology{{{"a", NodeKind::Endpoint},
                   {"sw", NodeKind::Switch},
                   {"b", NodeKind::Endpoint}},
                  {{"a-sw", "a", "sw", rate, 0}, {"sw-b", "sw", "b", rate, 0}}};
}

AggregateFrame make_frame(const std::string& id, Ns period, Ns deadline, std::int64_t payload,
                          const Route& route, bool critical = false) {
  return AggregateFrame{id, {id}, period, deadline, payload, route, critical};
}

// ---- independent oracles ----------------------------------------------

std::vector<std::pair<Ns, Ns>> family_windows(Ns period, Ns offset, Ns dur, Ns horizon) {
  std::vector<std::pair<Ns, Ns>> out;
  for (Ns s = offset; s < horizon; s += period) out.emplace_back(s, s + dur);
  return out;
}

// Interval-overlap oracle over two full cycles, catching boundary straddles.
bool naive_family_conflict(Ns pa, Ns oa, Ns da, Ns pb, Ns ob, Ns db) {
  const Ns cycle = std::lcm(pa, pb);
  const auto a = family_windows(pa, oa, da, 2 * cycle);
  const auto b = family_windows(pb, ob, db, 2 * cycle);
  for (const auto& wa : a)
    for (const auto& wb : b)
      if (wa.first < wb.second && wb.first < wa.second) return true;
  return false;
}

struct CommittedFrame {
  AggregateFrame frame;
  std::vector<Ns> offsets;
};

bool naive_candidate_ok_on_link(const AggregateFrame& frame, Ns offset, Ns duration,
                                const std::string& link,
                                const std::vector<CommittedFrame>& committed,
                                const Topology& topo) {
  for (const CommittedFrame& c : committed) {
    for (std::size_t i = 0; i < c.frame.route.links.size(); ++i) {
      if (c.frame.route.links[i] != link) continue;
      const Ns cdur = transmission_duration(c.frame.payload, kFrameOverheadBytes,
                                            topo.link_at(link).rate_bps);
      if (naive_family_conflict(frame.period, offset, duration, c.frame.period, c.offsets[i],
                                cdur))
        return false;
    }
  }
  return true;
}

// Greedy unit-stepped search written the slow way: candidate by candidate,
// naive window materialization per check.
std::optional<std::vector<Ns>> oracle_find_offsets_unitstep(
    const AggregateFrame& frame, const std::vector<CommittedFrame>& committed,
    const Topology& topo, Ns step) {
  const std::size_t hops = frame.route.links.size();
  std::vector<Ns> durations(hops), props(hops), latest(hops);
  for (std::size_t i = 0; i < hops; ++i) {
    const Link& link = topo.link_at(frame.route.links[i]);
    durations[i] = transmission_duration(frame.payload, kFrameOverheadBytes, link.rate_bps);
    props[i] = link.prop_delay_ns;
  }
  Ns tail = 0;
  for (std::size_t i = hops; i-- > 0;) {
    tail += durations[i] + props[i];
    latest[i] = frame.deadline - tail;
  }
  std::vector<Ns> offsets(hops);
  Ns base = 0;
  for (std::size_t i = 0; i < hops; ++i) {
    Ns x = base;
    bool found = false;
    while (x <= latest[i]) {
      if (naive_candidate_ok_on_link(frame, x, durations[i], frame.route.links[i], committed,
                                     topo)) {
        found = true;
        break;
      }
      x += step;
    }
    if (!found) return std::nullopt;
    offsets[i] = x;
    base = x + durations[i] + props[i];
  }
  return offsets;
}

SchedulerConfig config_with(Ns step, bool fast_forward) {
  SchedulerConfig cfg;
  cfg.step = step;
  cfg.fast_forward = fast_forward;
  return cfg;
}

}  // namespace

TEST_CASE("order_frames sorts by deadline with critical-first ties") {
  const Route r{{"L"}};
  std::vector<AggregateFrame> frames = {make_frame("x", 20 * kMillisecond, 800 * kMicrosecond, 100, r),
                                        make_frame("y", 20 * kMillisecond, 300 * kMicrosecond, 100, r),
                                        make_frame("z", 20 * kMillisecond, 500 * kMicrosecond, 100, r)};
  const auto ordered = order_frames(frames);
  CHECK(ordered[0].id == "y");
  CHECK(ordered[1].id == "z");
  CHECK(ordered[2].id == "x");

  CHECK(order_frames({}).empty());
}

TEST_CASE("equal deadlines put critical-containing frames first") {
  const Route r{{"L"}};
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<AggregateFrame> frames;
    const int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i)
      frames.push_back(make_frame("f" + std::to_string(i), 20 * kMillisecond,
                                  (300 + 100 * static_cast<Ns>(rng() % 3)) * kMicrosecond, 100, r,
                                  (rng() % 2) == 0));
    const auto ordered = order_frames(frames);
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
      CHECK(ordered[i].deadline <= ordered[i + 1].deadline);
      if (ordered[i].deadline == ordered[i + 1].deadline) {
        // critical first, id ascending within equal criticality
        if (!ordered[i].contains_critical) CHECK_FALSE(ordered[i + 1].contains_critical);
        if (ordered[i].contains_critical == ordered[i + 1].contains_critical)
          CHECK(ordered[i].id < ordered[i + 1].id);
      }
    }
  }
}

TEST_CASE("check_constraints accepts a lone frame and reports violations in order") {
  const Topology topo = us_grid_topology();
  const Route route{{"a-sw", "sw-b"}};
  const AggregateFrame f = make_frame("f", 100 * kMicrosecond, 40 * kMicrosecond, 58, route);
  // payload 58 -> (58+42)*100ns = 10 us per hop
  const CommittedLinks empty;

  SUBCASE("no contenders") {
    const std::vector<Ns> offsets = {0, 10 * kMicrosecond};
    CHECK_FALSE(check_constraints(f, offsets, empty, topo).has_value());
  }

  SUBCASE("forwarding violation when hop 2 starts early") {
    const std::vector<Ns> offsets = {0, 9 * kMicrosecond};
    const auto v = check_constraints(f, offsets, empty, topo);
    REQUIRE(v.has_value());
    CHECK(v->kind == ConstraintKind::Forwarding);
    CHECK(v->link_id == "sw-b");
  }

  SUBCASE("deadline violation reported before forwarding") {
    const std::vector<Ns> offsets = {0, 35 * kMicrosecond};  // finish 45 > 40, also fine chain
    const auto v = check_constraints(f, offsets, empty, topo);
    REQUIRE(v.has_value());
    CHECK(v->kind == ConstraintKind::Deadline);
  }
}

TEST_CASE("two same-period frames offset by duration-1 conflict") {
  const Topology topo = one_link_topology();
  const Route route{{"L"}};
  const AggregateFrame a = make_frame("a", 20 * kMillisecond, 20 * kMillisecond, 1500, route);
  const AggregateFrame b = make_frame("b", 20 * kMillisecond, 20 * kMillisecond, 1500, route);
  const Ns dur = 123'360;

  CommittedLinks committed;
  const std::vector<Ns> a_offsets = {0};
  committed.commit(a, topo, a_offsets);

  const std::vector<Ns> overlap = {dur - 1};
  const auto v = check_constraints(b, overlap, committed, topo);
  REQUIRE(v.has_value());
  CHECK(v->kind == ConstraintKind::LinkConflict);
  CHECK(v->other_frame == "a");
  CHECK(naive_family_conflict(20 * kMillisecond, 0, dur, 20 * kMillisecond, dur - 1, dur));

  const std::vector<Ns> touch = {dur};
  CHECK_FALSE(check_constraints(b, touch, committed, topo).has_value());
  CHECK_FALSE(naive_family_conflict(20 * kMillisecond, 0, dur, 20 * kMillisecond, dur, dur));
}

TEST_CASE("patterns_conflict agrees with the interval-overlap oracle") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 4000; ++iter) {
    const Ns pa = (1 + static_cast<Ns>(rng() % 12)) * kMicrosecond;
    const Ns pb = (1 + static_cast<Ns>(rng() % 12)) * kMicrosecond;
    const Ns da = 1 + static_cast<Ns>(rng() % pa);
    const Ns db = 1 + static_cast<Ns>(rng() % pb);
    const Ns oa = static_cast<Ns>(rng() % pa);
    const Ns ob = static_cast<Ns>(rng() % pb);
    const bool fast = patterns_conflict(pa, oa, da, pb, ob, db);
    const bool slow = naive_family_conflict(pa, oa, da, pb, ob, db);
    CHECK(fast == slow);
  }
}

TEST_CASE("find_offsets picks the earliest slot on an idle network") {
  const Topology topo = one_link_topology();
  const AggregateFrame f =
      make_frame("f", 20 * kMillisecond, 500 * kMicrosecond, 100, Route{{"L"}});
  const CommittedLinks empty;
  const auto res = find_offsets(f, empty, topo, {});
  REQUIRE(std::holds_alternative<std::vector<Ns>>(res));
  CHECK(std::get<std::vector<Ns>>(res) == std::vector<Ns>{0});
}

TEST_CASE("second identical frame lands right after the first") {
  // payload 1208 -> 1250 bytes -> exactly 100 us on the wire
  const Topology topo = one_link_topology();
  const Route route{{"L"}};
  const AggregateFrame a = make_frame("a", 20 * kMillisecond, 20 * kMillisecond, 1208, route);
  const AggregateFrame b = make_frame("b", 20 * kMillisecond, 20 * kMillisecond, 1208, route);
  const Ns dur = 100 * kMicrosecond;

  for (const bool fast_forward : {true, false}) {
    CAPTURE(fast_forward);
    CommittedLinks committed;
    const std::vector<Ns> zero = {0};
    committed.commit(a, topo, zero);
    const auto res = find_offsets(b, committed, topo, config_with(1000, fast_forward));
    REQUIRE(std::holds_alternative<std::vector<Ns>>(res));
    CHECK(std::get<std::vector<Ns>>(res) == std::vector<Ns>{dur});
  }

  // independent unit-step oracle agrees
  std::vector<CommittedFrame> committed = {{a, {0}}};
  const auto oracle = oracle_find_offsets_unitstep(b, committed, topo, 1000);
  REQUIRE(oracle.has_value());
  CHECK(*oracle == std::vector<Ns>{dur});
}

TEST_CASE("a frame whose duration exceeds its deadline is unschedulable") {
  const Topology topo = one_link_topology();
  const AggregateFrame f =
      make_frame("f", 20 * kMillisecond, 100 * kMicrosecond, 1500, Route{{"L"}});  // 123.36 us
  const CommittedLinks empty;
  const auto res = find_offsets(f, empty, topo, {});
  REQUIRE(std::holds_alternative<ConstraintViolation>(res));
  CHECK(std::get<ConstraintViolation>(res).kind == ConstraintKind::Deadline);
}

TEST_CASE("returned offsets always satisfy check_constraints") {
  const Topology topo = us_grid_topology();
  const Route route{{"a-sw", "sw-b"}};
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 200; ++iter) {
    CommittedLinks committed;
    std::vector<AggregateFrame> frames;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const Ns period = std::vector<Ns>{20, 25, 40, 50, 100}[rng() % 5] * kMicrosecond;
      const std::int64_t payload = 8 + 10 * static_cast<std::int64_t>(rng() % 5);
      const Ns deadline = period - static_cast<Ns>(rng() % 5) * kMicrosecond;
      frames.push_back(make_frame("f" + std::to_string(i), period, deadline, payload, route));
    }
    for (const AggregateFrame& f : frames) {
      const auto res = find_offsets(f, committed, topo, config_with(1000, (rng() % 2) == 0));
      if (const auto* offsets = std::get_if<std::vector<Ns>>(&res)) {
        CHECK_FALSE(check_constraints(f, *offsets, committed, topo).has_value());
        committed.commit(f, topo, *offsets);
      }
    }
  }
}

TEST_CASE("disaggregate_step removes the largest non-critical payload") {
  const Topology topo = make_default_topology();
  const Route route = shortest_route(topo, "dcu1", "dcu2");
  std::vector<Flow> flows;
  auto add = [&](const std::string& id, std::int64_t payload, Criticality crit, Ns deadline) {
    Flow f;
    f.id = id;
    f.criticality = crit;
    f.period = 20 * kMillisecond;
    f.deadline = deadline;
    f.payload = payload;
    f.src = "dcu1";
    f.dst = "dcu2";
    f.route = route;
    flows.push_back(f);
  };
  add("c1", 600, Criticality::Critical, 500 * kMicrosecond);
  add("n1", 400, Criticality::NonCritical, 400 * kMicrosecond);
  add("n2", 300, Criticality::NonCritical, 600 * kMicrosecond);
  const FlowIndex index(flows);
  const std::vector<std::string> members = {"c1", "n1", "n2"};
  const AggregateFrame agg = build_aggregate_from_members("agg", members, index);

  const DisaggregateStep step = disaggregate_step(agg, index);
  CHECK(step.extracted.id == "n1");
  REQUIRE(step.reduced.has_value());
  CHECK(step.reduced->payload == 900);
  // removing the min-deadline member raises the aggregate deadline
  CHECK(step.reduced->deadline == 500 * kMicrosecond);

  const DisaggregateStep step2 = disaggregate_step(*step.reduced, index);
  CHECK(step2.extracted.id == "n2");
  REQUIRE(step2.reduced.has_value());
  CHECK(step2.reduced->payload == 600);
  CHECK_THROWS_AS(disaggregate_step(*step2.reduced, index), std::invalid_argument);
}

TEST_CASE("disaggregate_step ties break by flow id and dissolve to none") {
  const Topology topo = make_default_topology();
  const Route route = shortest_route(topo, "dcu1", "dcu2");
  std::vector<Flow> flows;
  for (const std::string id : {"nb", "na"}) {
    Flow f;
    f.id = id;
    f.criticality = Criticality::NonCritical;
    f.period = 20 * kMillisecond;
    f.deadline = 500 * kMicrosecond;
    f.payload = 500;
    f.src = "dcu1";
    f.dst = "dcu2";
    f.route = route;
    flows.push_back(f);
  }
  const FlowIndex index(flows);
  const std::vector<std::string> members = {"nb", "na"};
  const AggregateFrame agg = build_aggregate_from_members("agg", members, index);
  const DisaggregateStep step = disaggregate_step(agg, index);
  CHECK(step.extracted.id == "na");

  // singleton non-critical dissolves entirely
  const std::vector<std::string> solo = {"nb"};
  const AggregateFrame single = build_aggregate_from_members("solo", solo, index);
  const DisaggregateStep last = disaggregate_step(single, index);
  CHECK(last.extracted.id == "nb");
  CHECK_FALSE(last.reduced.has_value());
}

TEST_CASE("disaggregation monotonically shrinks payload, never tightens deadline") {
  const Topology topo = make_default_topology();
  const Route route = shortest_route(topo, "dcu1", "dcu2");
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Flow> flows;
    const int n = 2 + static_cast<int>(rng() % 5);
    std::vector<std::string> members;
    for (int i = 0; i < n; ++i) {
      Flow f;
      f.id = "m" + std::to_string(i);
      f.criticality = (rng() % 3 == 0) ? Criticality::Critical : Criticality::NonCritical;
      f.period = std::vector<Ns>{20, 40, 80}[rng() % 3] * kMillisecond;
      f.deadline = (200 + static_cast<Ns>(rng() % 600)) * kMicrosecond;
      f.payload = 50 + static_cast<std::int64_t>(rng() % 250);
      f.src = "dcu1";
      f.dst = "dcu2";
      f.route = route;
      flows.push_back(f);
      members.push_back(f.id);
    }
    const FlowIndex index(flows);
    AggregateFrame agg = build_aggregate_from_members("agg", members, index);
    bool has_noncritical = false;
    for (const Flow& f : flows) has_noncritical |= !f.is_critical();
    while (has_noncritical) {
      const DisaggregateStep step = disaggregate_step(agg, index);
      if (!step.reduced.has_value()) break;
      CHECK(step.reduced->payload < agg.payload);
      CHECK(step.reduced->deadline >= agg.deadline);
      CHECK(aggregate_frame_violations(*step.reduced, index).empty());
      agg = *step.reduced;
      has_noncritical = false;
      for (const std::string& mid : agg.members)
        has_noncritical |= !index.at(mid).is_critical();
    }
  }
}

TEST_CASE("mcfs2l with ample capacity equals plain offset search") {
  const Topology topo = make_default_topology();
  WorkloadParams params;
  params.n_frames = 40;
  params.rng_seed = 5;
  const std::vector<Flow> flows = generate(params, topo, default_endpoints());
  const AggregationResult agg = aggregate_all(flows);
  const SchedulerConfig cfg;
  const ScheduleResult result = schedule_mcfs2l(agg.frames, flows, topo, cfg);

  CHECK(result.schedule.rejected.empty());
  CHECK(result.rejected_flows.empty());
  CHECK(result.reassembly.empty());
  REQUIRE(result.frames.size() == agg.frames.size());

  // identical to running find_offsets frame by frame in priority order
  CommittedLinks committed;
  for (const AggregateFrame& f : order_frames(agg.frames)) {
    const auto res = find_offsets(f, committed, topo, cfg);
    REQUIRE(std::holds_alternative<std::vector<Ns>>(res));
    const auto& offsets = std::get<std::vector<Ns>>(res);
    committed.commit(f, topo, offsets);
    for (std::size_t i = 0; i < f.route.links.size(); ++i)
      CHECK(result.schedule.offsets.at(f.id).at(f.route.links[i]) == offsets[i]);
  }
}

TEST_CASE("reassembly rescues the critical member when the aggregate cannot fit") {
  const Topology topo = one_link_topology();
  const Route route{{"L"}};

  // The wall (1500 B, 123.36 us) schedules first (deadline 150 us) and takes
  // [0, 123.36 us). The full aggregate (996 B on the wire, 79.68 us) cannot
  // finish by its 180 us deadline behind it, so the largest non-critical
  // member is extracted; the 52.64 us residual then fits.
  std::vector<Flow> flows;
  auto add = [&](const std::string& id, std::int64_t payload, Criticality crit, Ns deadline) {
    Flow f;
    f.id = id;
    f.criticality = crit;
    f.period = 20 * kMillisecond;
    f.deadline = deadline;
    f.payload = payload;
    f.src = "a";
    f.dst = "b";
    f.route = route;
    flows.push_back(f);
  };
  add("crit", 458, Criticality::Critical, 180 * kMicrosecond);
  add("non1", 338, Criticality::NonCritical, 200 * kMicrosecond);
  add("non2", 158, Criticality::NonCritical, 250 * kMicrosecond);
  add("wall", 1500, Criticality::Critical, 150 * kMicrosecond);

  const FlowIndex index(flows);
  const std::vector<std::string> agg_members = {"crit", "non1", "non2"};
  const AggregateFrame agg = build_aggregate_from_members("agg-0001", agg_members, index);
  REQUIRE(agg.payload == 954);
  REQUIRE(agg.deadline == 180 * kMicrosecond);
  const AggregateFrame wall =
      make_frame("wall", 20 * kMillisecond, 150 * kMicrosecond, 1500, route, true);

  // With the wall committed at offset 0, the full aggregate is unschedulable.
  const SchedulerConfig cfg;
  CommittedLinks committed;
  const std::vector<Ns> wall_offsets = {0};
  committed.commit(wall, topo, wall_offsets);
  REQUIRE(std::holds_alternative<ConstraintViolation>(find_offsets(agg, committed, topo, cfg)));

  // Brute force over extraction subsets: some subset of non-critical members
  // can be removed to make the residual schedulable.
  bool any_subset_fits = false;
  for (int mask = 0; mask < 4; ++mask) {
    std::vector<std::string> members = {"crit"};
    if ((mask & 1) == 0) members.push_back("non1");
    if ((mask & 2) == 0) members.push_back("non2");
    const AggregateFrame candidate = build_aggregate_from_members("try", members, index);
    if (std::holds_alternative<std::vector<Ns>>(find_offsets(candidate, committed, topo, cfg)))
      any_subset_fits = true;
  }
  CHECK(any_subset_fits);

  // The scheduler must find a feasible residual and keep the critical flow.
  const std::vector<AggregateFrame> frames = {agg, wall};
  const ScheduleResult result = schedule_mcfs2l(frames, flows, topo, cfg);

  std::set<std::string> accepted_flows;
  for (const AggregateFrame& f : result.frames)
    if (result.schedule.accepted.contains(f.id))
      for (const std::string& mid : f.members) accepted_flows.insert(mid);

  CHECK(accepted_flows.contains("crit"));
  CHECK(accepted_flows.contains("non2"));  // stays in the residual
  CHECK(accepted_flows.contains("wall"));
  REQUIRE(result.reassembly.size() == 1);
  CHECK(result.reassembly[0].flow_id == "non1");  // largest non-critical payload
  CHECK(result.reassembly[0].extracted_from == "agg-0001");
  CHECK_FALSE(result.reassembly[0].rescheduled_as.empty());
  for (const ReassemblyEvent& e : result.reassembly) CHECK(e.flow_id != "crit");
}

TEST_CASE("extracted flows reschedule as new frames when room remains") {
  // Aggregate of one critical + one non-critical that only fits without the
  // non-critical member; the extracted member finds a later slot on its own.
  const Topology topo = one_link_topology();
  const Route route{{"L"}};
  std::vector<Flow> flows;
  auto add = [&](const std::string& id, std::int64_t payload, Criticality crit, Ns deadline) {
    Flow f;
    f.id = id;
    f.criticality = crit;
    f.period = 20 * kMillisecond;
    f.deadline = deadline;
    f.payload = payload;
    f.src = "a";
    f.dst = "b";
    f.route = route;
    flows.push_back(f);
  };
  add("crit", 458, Criticality::Critical, 100 * kMicrosecond);   // 40us, tight deadline
  add("non", 958, Criticality::NonCritical, 20 * kMillisecond);  // 80us, loose deadline
  add("wall", 208, Criticality::Critical, 60 * kMicrosecond);    // 20us at offset 40us max

  const FlowIndex index(flows);
  const std::vector<std::string> agg_members = {"crit", "non"};
  const AggregateFrame agg = build_aggregate_from_members("agg-0001", agg_members, index);
  const AggregateFrame wall = make_frame("wall", 20 * kMillisecond, 60 * kMicrosecond, 208, route, true);

  // wall (deadline 60us) schedules first at offset 0..40; aggregate is 120us
  // long with deadline 100us -> impossible; residual crit (40us) fits.
  const ScheduleResult result =
      schedule_mcfs2l(std::vector<AggregateFrame>{agg, wall}, flows, topo, {});

  REQUIRE(result.reassembly.size() == 1);
  CHECK(result.reassembly[0].flow_id == "non");
  CHECK(result.reassembly[0].extracted_from == "agg-0001");
  CHECK(result.reassembly[0].rescheduled_as == "ragg-0001");

  std::set<std::string> accepted_flows;
  for (const AggregateFrame& f : result.frames)
    if (result.schedule.accepted.contains(f.id))
      for (const std::string& mid : f.members) accepted_flows.insert(mid);
  CHECK(accepted_flows == std::set<std::string>{"crit", "non", "wall"});
}

TEST_CASE("failed second-pass aggregates split into singletons with one retry each") {
  // Pass 1: wall [0, 100us) forces two extractions from the aggregate; the
  // residual {c} lands at [100, 120us). Pass 2: the re-aggregate {n1, n2}
  // (46.64us, deadline 150us) cannot start by 103.36us, so it splits;
  // solo-n1 (40us, latest start 110us) still fails, solo-n2 (10us) fits.
  const Topology topo = one_link_topology();
  const Route route{{"L"}};
  std::vector<Flow> flows;
  auto add = [&](const std::string& id, std::int64_t payload, Criticality crit, Ns deadline) {
    Flow f;
    f.id = id;
    f.criticality = crit;
    f.period = 20 * kMillisecond;
    f.deadline = deadline;
    f.payload = payload;
    f.src = "a";
    f.dst = "b";
    f.route = route;
    flows.push_back(f);
  };
  add("c", 208, Criticality::Critical, 124 * kMicrosecond);
  add("n1", 458, Criticality::NonCritical, 150 * kMicrosecond);
  add("n2", 83, Criticality::NonCritical, 160 * kMicrosecond);
  add("wall", 1208, Criticality::Critical, 110 * kMicrosecond);

  const FlowIndex index(flows);
  const std::vector<std::string> agg_members = {"c", "n1", "n2"};
  const AggregateFrame agg = build_aggregate_from_members("agg-0001", agg_members, index);
  const AggregateFrame wall =
      make_frame("wall", 20 * kMillisecond, 110 * kMicrosecond, 1208, route, true);

  const ScheduleResult result =
      schedule_mcfs2l(std::vector<AggregateFrame>{agg, wall}, flows, topo, {});

  CHECK(result.schedule.accepted == std::set<std::string>{"agg-0001", "solo-n2", "wall"});
  CHECK(result.schedule.rejected == std::set<std::string>{"solo-n1"});
  REQUIRE(result.rejected_flows.size() == 1);
  CHECK(result.rejected_flows[0].flow_id == "n1");
  CHECK(result.rejected_flows[0].reason == "deadline");

  // residual kept only the critical member and sits right behind the wall
  const AggregateFrame* residual = nullptr;
  for (const AggregateFrame& f : result.frames)
    if (f.id == "agg-0001") residual = &f;
  REQUIRE(residual != nullptr);
  CHECK(residual->members == std::vector<std::string>{"c"});
  CHECK(result.schedule.offsets.at("agg-0001").at("L") == 100 * kMicrosecond);
  CHECK(result.schedule.offsets.at("solo-n2").at("L") == 120 * kMicrosecond);

  // audit: extraction order largest-first, final frames recorded
  REQUIRE(result.reassembly.size() == 2);
  CHECK(result.reassembly[0] == ReassemblyEvent{"n1", "agg-0001", "solo-n1"});
  CHECK(result.reassembly[1] == ReassemblyEvent{"n2", "agg-0001", "solo-n2"});
}

TEST_CASE("identical inputs produce bit-identical schedules") {
  const Topology topo = make_default_topology();
  WorkloadParams params;
  params.n_frames = 120;
  params.rng_seed = 77;
  const std::vector<Flow> flows = generate(params, topo, default_endpoints());
  const AggregationResult agg = aggregate_all(flows);

  const ScheduleResult a = schedule_mcfs2l(agg.frames, flows, topo, {});
  const ScheduleResult b = schedule_mcfs2l(agg.frames, flows, topo, {});
  CHECK(a.schedule.offsets == b.schedule.offsets);
  CHECK(a.schedule.accepted == b.schedule.accepted);
  CHECK(a.schedule.rejected == b.schedule.rejected);
  CHECK(a.frames == b.frames);
  CHECK(a.reassembly == b.reassembly);
}

TEST_CASE("fast-forward equals unit-step on grid-aligned instances") {
  const Topology topo = us_grid_topology();
  const Route route{{"a-sw", "sw-b"}};
  std::mt19937_64 rng(53);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<Flow> flows;
    std::vector<AggregateFrame> frames;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      Flow f;
      f.id = "f" + std::to_string(i);
      f.criticality = (rng() % 2) == 0 ? Criticality::Critical : Criticality::NonCritical;
      f.period = std::vector<Ns>{20, 25, 40, 50, 100}[rng() % 5] * kMicrosecond;
      const std::int64_t max_k = 2;  // payload 8 or 18 -> 5us or 6us
      f.payload = 8 + 10 * static_cast<std::int64_t>(rng() % max_k);
      const Ns latency = 2 * (f.payload + 42) * 100;
      f.deadline = latency + static_cast<Ns>(rng() % 9) * kMicrosecond;
      if (f.deadline > f.period) f.deadline = f.period;
      f.src = "a";
      f.dst = "b";
      f.route = route;
      flows.push_back(f);
      frames.push_back(
          make_frame(f.id, f.period, f.deadline, f.payload, route, f.is_critical()));
    }
    SchedulerConfig on = config_with(1000, true);
    SchedulerConfig off = config_with(1000, false);
    const ScheduleResult with_ff = schedule_mcfs2l(frames, flows, topo, on);
    const ScheduleResult without_ff = schedule_mcfs2l(frames, flows, topo, off);
    CHECK(with_ff.schedule.accepted == without_ff.schedule.accepted);
    CHECK(with_ff.schedule.rejected == without_ff.schedule.rejected);
    CHECK(with_ff.schedule.offsets == without_ff.schedule.offsets);
  }
}

TEST_CASE("greedy search is complete: never unschedulable when the grid oracle fits") {
  const Topology topo = us_grid_topology();
  const Route route{{"a-sw", "sw-b"}};
  std::mt19937_64 rng(61);
  for (int iter = 0; iter < 150; ++iter) {
    std::vector<CommittedFrame> committed_oracle;
    CommittedLinks committed;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      const Ns period = std::vector<Ns>{20, 25, 40, 50, 100}[rng() % 5] * kMicrosecond;
      const std::int64_t payload = 8 + 10 * static_cast<std::int64_t>(rng() % 3);
      const Ns latency = 2 * (payload + 42) * 100;
      Ns deadline = latency + static_cast<Ns>(rng() % 11) * kMicrosecond;
      if (deadline > period) deadline = period;
      const AggregateFrame f =
          make_frame("f" + std::to_string(i), period, deadline, payload, route);
      const auto mine = find_offsets(f, committed, topo, config_with(1000, false));
      const auto oracle = oracle_find_offsets_unitstep(f, committed_oracle, topo, 1000);
      if (oracle.has_value()) {
        REQUIRE(std::holds_alternative<std::vector<Ns>>(mine));
        CHECK(std::get<std::vector<Ns>>(mine) == *oracle);
        committed.commit(f, topo, *oracle);
        committed_oracle.push_back({f, *oracle});
      } else {
        CHECK(std::holds_alternative<ConstraintViolation>(mine));
      }
    }
  }
}
