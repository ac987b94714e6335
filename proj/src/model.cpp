#include "mcfs/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mcfs {

namespace {

bool valid_identifier(const std::string& id) {
  if (id.empty()) return false;
  // Ids end up in CSV columns and file paths; keep them to a safe charset.
  return id.find_first_not_of(
             "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.:-") ==
         std::string::npos;
}

}  // namespace

Topology::Topology(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!valid_identifier(n.id))
      throw std::invalid_argument("topology: invalid node id '" + n.id + "'");
    if (!node_index_.emplace(n.id, i).second)
      throw std::invalid_argument("topology: duplicate node id '" + n.id + "'");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!valid_identifier(l.id))
      throw std::invalid_argument("topology: invalid link id '" + l.id + "'");
    if (!link_index_.emplace(l.id, i).second)
      throw std::invalid_argument("topology: duplicate link id '" + l.id + "'");
    if (l.src == l.dst)
      throw std::invalid_argument("topology: link '" + l.id + "' is a self-loop");
    if (!node_index_.contains(l.src))
      throw std::invalid_argument("topology: link '" + l.id + "' references unknown node '" +
                                  l.src + "'");
    if (!node_index_.contains(l.dst))
      throw std::invalid_argument("topology: link '" + l.id + "' references unknown node '" +
                                  l.dst + "'");
    if (l.rate_bps <= 0)
      throw std::invalid_argument("topology: link '" + l.id + "' rate must be positive");
    if (l.prop_delay_ns < 0)
      throw std::invalid_argument("topology: link '" + l.id + "' prop_delay must be >= 0");
  }
}

const Node* Topology::find_node(const std::string& id) const {
  auto it = node_index_.find(id);
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const Link* Topology::find_link(const std::string& id) const {
  auto it = link_index_.find(id);
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Link& Topology::link_at(const std::string& id) const {
  const Link* l = find_link(id);
  if (l == nullptr) throw std::invalid_argument("topology: unknown link '" + id + "'");
  return *l;
}

FlowIndex::FlowIndex(std::span<const Flow> flows) {
  for (const Flow& f : flows) {
    if (!by_id_.emplace(f.id, &f).second)
      throw std::invalid_argument("flow index: duplicate flow id '" + f.id + "'");
  }
}

const Flow* FlowIndex::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second;
}

const Flow& FlowIndex::at(const std::string& id) const {
  const Flow* f = find(id);
  if (f == nullptr) throw std::invalid_argument("flow index: unknown flow id '" + id + "'");
  return *f;
}

Ns transmission_duration(std::int64_t payload_bytes, std::int64_t overhead_bytes,
                         std::int64_t rate_bps) {
  if (payload_bytes < 0 || overhead_bytes < 0)
    throw std::invalid_argument("transmission_duration: byte counts must be >= 0");
  if (rate_bps <= 0)
    throw std::invalid_argument("transmission_duration: rate must be positive");
  const unsigned __int128 bits =
      static_cast<unsigned __int128>(payload_bytes + overhead_bytes) * 8u;
  const unsigned __int128 numerator = bits * 1'000'000'000u;
  const unsigned __int128 q =
      (numerator + static_cast<unsigned __int128>(rate_bps) - 1) /
      static_cast<unsigned __int128>(rate_bps);
  if (q > static_cast<unsigned __int128>(INT64_MAX))
    throw std::overflow_error("transmission_duration: result exceeds int64 ns");
  return static_cast<Ns>(q);
}

bool is_harmonic(std::span<const Ns> periods) {
  if (periods.empty()) throw std::invalid_argument("is_harmonic: empty period set");
  std::vector<Ns> sorted(periods.begin(), periods.end());
  for (Ns p : sorted)
    if (p <= 0) throw std::invalid_argument("is_harmonic: periods must be positive");
  std::sort(sorted.begin(), sorted.end());
  // Pairwise divisibility of a finite set is equivalent to chain divisibility
  // of the sorted sequence.
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1] % sorted[i] != 0) return false;
  return true;
}

Ns checked_lcm(Ns a, Ns b) {
  const Ns g = std::gcd(a, b);
  const __int128 result = static_cast<__int128>(a / g) * b;
  if (result > INT64_MAX) throw std::overflow_error("lcm: result exceeds int64 ns");
  return static_cast<Ns>(result);
}

Ns hyperperiod(std::span<const Ns> periods) {
  if (periods.empty()) throw std::invalid_argument("hyperperiod: empty period set");
  Ns acc = 1;
  for (Ns p : periods) {
    if (p <= 0) throw std::invalid_argument("hyperperiod: periods must be positive");
    acc = checked_lcm(acc, p);
  }
  return acc;
}

Ns floor_mod(Ns value, Ns modulus) {
  Ns r = value % modulus;
  return r < 0 ? r + modulus : r;
}

std::vector<std::string> route_violations(const Route& route, const Topology& topo,
                                          const std::string& src, const std::string& dst) {
  std::vector<std::string> out;
  if (route.links.empty()) {
    out.push_back("route: must contain at least one link");
    return out;
  }
  for (const std::string& lid : route.links) {
    if (topo.find_link(lid) == nullptr) {
      out.push_back("route: unknown link '" + lid + "'");
      return out;
    }
  }
  const Link& first = topo.link_at(route.links.front());
  const Link& last = topo.link_at(route.links.back());
  if (first.src != src)
    out.push_back("route: first link starts at '" + first.src + "', expected '" + src + "'");
  if (last.dst != dst)
    out.push_back("route: last link ends at '" + last.dst + "', expected '" + dst + "'");
  for (std::size_t i = 0; i + 1 < route.links.size(); ++i) {
    const Link& a = topo.link_at(route.links[i]);
    const Link& b = topo.link_at(route.links[i + 1]);
    if (a.dst != b.src)
      out.push_back("route: links '" + a.id + "' and '" + b.id + "' do not chain");
  }
  const Node* sn = topo.find_node(src);
  const Node* dn = topo.find_node(dst);
  if (sn != nullptr && sn->kind != NodeKind::Endpoint)
    out.push_back("route: source '" + src + "' is not an endpoint");
  if (dn != nullptr && dn->kind != NodeKind::Endpoint)
    out.push_back("route: destination '" + dst + "' is not an endpoint");
  return out;
}

std::vector<std::string> flow_violations(const Flow& flow, const Topology& topo) {
  std::vector<std::string> out;
  if (!valid_identifier(flow.id)) out.push_back("id: empty or contains unsafe characters");
  if (flow.period <= 0) out.push_back("period_ns: must be positive");
  if (flow.deadline <= 0) out.push_back("deadline_ns: must be positive");
  if (flow.period > 0 && flow.deadline > flow.period)
    out.push_back("deadline_ns: deadline exceeds period");
  if (flow.payload < 1 || flow.payload > kMaxPayloadBytes)
    out.push_back("payload_bytes: must be within [1, 1500]");
  if (topo.find_node(flow.src) == nullptr) out.push_back("src: unknown node '" + flow.src + "'");
  if (topo.find_node(flow.dst) == nullptr) out.push_back("dst: unknown node '" + flow.dst + "'");
  for (std::string& v : route_violations(flow.route, topo, flow.src, flow.dst))
    out.push_back(std::move(v));
  return out;
}

void require_valid_flow(const Flow& flow, const Topology& topo) {
  const std::vector<std::string> violations = flow_violations(flow, topo);
  if (violations.empty()) return;
  std::string msg = "invalid flow '" + flow.id + "':";
  for (const std::string& v : violations) msg += " [" + v + "]";
  throw std::invalid_argument(msg);
}

std::string_view to_string(NodeKind kind) {
  return kind == NodeKind::Endpoint ? "endpoint" : "switch";
}

std::string_view to_string(Criticality c) {
  return c == Criticality::Critical ? "critical" : "non_critical";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "endpoint") return NodeKind::Endpoint;
  if (s == "switch") return NodeKind::Switch;
  throw std::invalid_argument("unknown node kind '" + s + "'");
}

Criticality criticality_from_string(const std::string& s) {
  if (s == "critical") return Criticality::Critical;
  if (s == "non_critical") return Criticality::NonCritical;
  throw std::invalid_argument("unknown criticality '" + s + "'");
}

}  // namespace mcfs
