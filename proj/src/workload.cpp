#include "mcfs/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>

namespace mcfs {

namespace {

// Bounded draws use plain modulo: the bias at these range sizes is
// negligible and the sequence stays identical across standard libraries.
std::int64_t draw_in(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool us_grid_empty(Ns lo, Ns hi) {
  const Ns first = (lo + kMicrosecond - 1) / kMicrosecond;
  const Ns last = hi / kMicrosecond;
  return first > last;
}

}  // namespace

std::vector<std::string> params_violations(const WorkloadParams& p) {
  std::vector<std::string> out;
  if (p.n_frames < 0) out.push_back("n_frames: must be >= 0");
  if (p.critical_fraction < 0.0 || p.critical_fraction > 1.0)
    out.push_back("critical_fraction: must be within [0, 1]");
  if (p.period_menu.empty()) {
    out.push_back("period_menu: must be non-empty");
  } else {
    for (Ns period : p.period_menu)
      if (period <= 0) {
        out.push_back("period_menu: periods must be positive");
        break;
      }
  }
  if (p.deadline_min <= 0) out.push_back("deadline_min: must be positive");
  if (p.deadline_max < p.deadline_min) out.push_back("deadline_max: must be >= deadline_min");
  if (!p.period_menu.empty()) {
    const Ns min_period = *std::min_element(p.period_menu.begin(), p.period_menu.end());
    if (p.deadline_max > min_period)
      out.push_back("deadline_max: must not exceed the smallest period");
  }
  if (p.payload_min < 1) out.push_back("payload_min: must be >= 1");
  if (p.payload_max < p.payload_min) out.push_back("payload_max: must be >= payload_min");
  if (p.payload_max > kMaxPayloadBytes) out.push_back("payload_max: must be <= 1500");
  if (p.deadline_min > 0 && p.deadline_max >= p.deadline_min &&
      us_grid_empty(p.deadline_min, p.deadline_max))
    out.push_back("deadline range: contains no point on the 1 us grid");
  return out;
}

Topology make_default_topology() {
  std::vector<Node> nodes = {{"dcu1", NodeKind::Endpoint},
                             {"dcu2", NodeKind::Endpoint},
                             {"dcu3", NodeKind::Endpoint},
                             {"sw", NodeKind::Switch}};
  std::vector<Link> links;
  for (const std::string dcu : {"dcu1", "dcu2", "dcu3"}) {
    links.push_back({dcu + "-sw", dcu, "sw", kDefaultLinkRateBps, 0});
    links.push_back({"sw-" + dcu, "sw", dcu, kDefaultLinkRateBps, 0});
  }
  return Topology(std::move(nodes), std::move(links));
}

EndpointSets default_endpoints() { return {{"dcu1", "dcu3"}, "dcu2"}; }

Route shortest_route(const Topology& topo, const std::string& src, const std::string& dst) {
  if (topo.find_node(src) == nullptr)
    throw std::invalid_argument("shortest_route: unknown node '" + src + "'");
  if (topo.find_node(dst) == nullptr)
    throw std::invalid_argument("shortest_route: unknown node '" + dst + "'");

  // Adjacency in link-id order for a deterministic tie-break.
  std::map<std::string, std::vector<const Link*>> adjacency;
  for (const Link& l : topo.links()) adjacency[l.src].push_back(&l);
  for (auto& [node, out] : adjacency)
    std::sort(out.begin(), out.end(),
              [](const Link* a, const Link* b) { return a->id < b->id; });

  std::map<std::string, const Link*> via;
  std::deque<std::string> frontier{src};
  via[src] = nullptr;
  while (!frontier.empty()) {
    const std::string node = frontier.front();
    frontier.pop_front();
    if (node == dst) break;
    auto it = adjacency.find(node);
    if (it == adjacency.end()) continue;
    for (const Link* l : it->second) {
      if (via.contains(l->dst)) continue;
      via[l->dst] = l;
      frontier.push_back(l->dst);
    }
  }
  if (!via.contains(dst))
    throw std::invalid_argument("shortest_route: no path from '" + src + "' to '" + dst + "'");

  std::vector<std::string> links;
  for (const Link* l = via[dst]; l != nullptr; l = via[l->src]) links.push_back(l->id);
  std::reverse(links.begin(), links.end());
  return Route{std::move(links)};
}

std::vector<Flow> generate(const WorkloadParams& params, const Topology& topo,
                           const EndpointSets& endpoints) {
  const std::vector<std::string> violations = params_violations(params);
  if (!violations.empty()) {
    std::string msg = "invalid workload params:";
    for (const std::string& v : violations) msg += " [" + v + "]";
    throw std::invalid_argument(msg);
  }
  if (endpoints.sources.empty())
    throw std::invalid_argument("generate: no source endpoints designated");
  for (const std::string& s : endpoints.sources) {
    const Node* n = topo.find_node(s);
    if (n == nullptr || n->kind != NodeKind::Endpoint)
      throw std::invalid_argument("generate: source '" + s + "' is not a declared endpoint");
  }
  const Node* dn = topo.find_node(endpoints.destination);
  if (dn == nullptr || dn->kind != NodeKind::Endpoint)
    throw std::invalid_argument("generate: destination '" + endpoints.destination +
                                "' is not a declared endpoint");

  std::map<std::string, Route> routes;
  for (const std::string& s : endpoints.sources)
    routes[s] = shortest_route(topo, s, endpoints.destination);

  std::mt19937_64 rng(params.rng_seed);
  const Ns dl_lo_us = (params.deadline_min + kMicrosecond - 1) / kMicrosecond;
  const Ns dl_hi_us = params.deadline_max / kMicrosecond;

  std::vector<Flow> flows;
  flows.reserve(static_cast<std::size_t>(params.n_frames));
  char buf[16];
  for (int i = 0; i < params.n_frames; ++i) {
    Flow f;
    std::snprintf(buf, sizeof buf, "f-%05d", i + 1);
    f.id = buf;
    f.src = endpoints.sources[rng() % endpoints.sources.size()];
    f.dst = endpoints.destination;
    f.route = routes[f.src];
    f.period = params.period_menu[rng() % params.period_menu.size()];
    f.deadline = draw_in(rng, dl_lo_us, dl_hi_us) * kMicrosecond;
    f.payload = draw_in(rng, params.payload_min, params.payload_max);
    f.criticality = Criticality::NonCritical;
    flows.push_back(std::move(f));
  }

  // Exactly round(n * critical_fraction) critical flows, at shuffled
  // positions (manual Fisher-Yates keeps the sequence library-independent).
  const int n_critical = static_cast<int>(
      std::llround(static_cast<double>(params.n_frames) * params.critical_fraction));
  std::vector<int> order(flows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng() % i]);
  for (int k = 0; k < n_critical; ++k)
    flows[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].criticality =
        Criticality::Critical;

  return flows;
}

}  // namespace mcfs
