#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mcfs {

// All timeline arithmetic is integer nanoseconds. At 100 Mbps one byte is
// exactly 80 ns, so every duration in the supported parameter range is exact.
using Ns = std::int64_t;

inline constexpr std::int64_t kMaxPayloadBytes = 1500;
inline constexpr std::int64_t kFrameOverheadBytes = 42;
inline constexpr std::int64_t kDefaultLinkRateBps = 100'000'000;
inline constexpr Ns kMillisecond = 1'000'000;
inline constexpr Ns kMicrosecond = 1'000;

enum class NodeKind { Endpoint, Switch };
enum class Criticality { Critical, NonCritical };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Endpoint;
};

struct Link {
  std::string id;
  std::string src;
  std::string dst;
  std::int64_t rate_bps = kDefaultLinkRateBps;
  Ns prop_delay_ns = 0;
};

// Directed graph of endpoints and switches. Validates id uniqueness and link
// endpoints on construction.
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  const Node* find_node(const std::string& id) const;
  const Link* find_link(const std::string& id) const;
  const Link& link_at(const std::string& id) const;  // throws if unknown

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> link_index_;
};

// Ordered list of dataflow link ids from a source endpoint to a destination
// endpoint. Consecutive links must chain dst -> src.
struct Route {
  std::vector<std::string> links;

  bool operator==(const Route&) const = default;
};

struct Flow {
  std::string id;
  Criticality criticality = Criticality::NonCritical;
  Ns period = 0;
  Ns deadline = 0;  // relative to release k*period
  std::int64_t payload = 0;
  std::string src;
  std::string dst;
  Route route;

  bool is_critical() const { return criticality == Criticality::Critical; }
  bool operator==(const Flow&) const = default;
};

// A schedulable unit: one or more member flows merged into a single frame.
struct AggregateFrame {
  std::string id;
  std::vector<std::string> members;  // flow ids, non-empty
  Ns period = 0;                     // gcd of member periods
  Ns deadline = 0;                   // min of member deadlines
  std::int64_t payload = 0;          // sum of member payloads
  Route route;
  bool contains_critical = false;

  bool operator==(const AggregateFrame&) const = default;
};

// Per-frame, per-link send offsets relative to each instance release
// k*period, plus the accepted/rejected frame id partition.
struct Schedule {
  std::map<std::string, std::map<std::string, Ns>> offsets;  // frame -> link -> offset
  std::set<std::string> accepted;
  std::set<std::string> rejected;
};

// Occupied interval on one link for one frame instance; also the GCL source.
struct TransmissionWindow {
  std::string link_id;
  std::string frame_id;
  std::int64_t instance = 0;
  Ns start = 0;  // absolute: instance*period + offset
  Ns end = 0;    // start + transmission duration on that link

  bool operator==(const TransmissionWindow&) const = default;
};

// Non-owning id -> Flow lookup over caller-owned storage.
class FlowIndex {
 public:
  FlowIndex() = default;
  explicit FlowIndex(std::span<const Flow> flows);

  const Flow* find(const std::string& id) const;
  const Flow& at(const std::string& id) const;  // throws if unknown
  std::size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<std::string, const Flow*> by_id_;
};

// Wire time of payload+overhead bytes at rate_bps, rounded up to whole ns.
// Exact (no rounding) at 100 Mbps since 1 byte = 80 ns.
Ns transmission_duration(std::int64_t payload_bytes, std::int64_t overhead_bytes,
                         std::int64_t rate_bps);

// True iff every pair of periods is ordered by divisibility.
bool is_harmonic(std::span<const Ns> periods);

// Least common multiple of a non-empty set of positive periods.
Ns hyperperiod(std::span<const Ns> periods);

Ns checked_lcm(Ns a, Ns b);  // throws std::overflow_error on int64 overflow
Ns floor_mod(Ns value, Ns modulus);

// Validation: each function returns human-readable violations, empty if ok.
std::vector<std::string> route_violations(const Route& route, const Topology& topo,
                                          const std::string& src, const std::string& dst);
std::vector<std::string> flow_violations(const Flow& flow, const Topology& topo);

// Throwing wrapper used by file loaders; message lists every violation.
void require_valid_flow(const Flow& flow, const Topology& topo);

std::string_view to_string(NodeKind kind);
std::string_view to_string(Criticality c);
NodeKind node_kind_from_string(const std::string& s);
Criticality criticality_from_string(const std::string& s);

}  // namespace mcfs
