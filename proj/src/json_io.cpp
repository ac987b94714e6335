#include "mcfs/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcfs {

namespace {

template <typename T>
T get_field(const Json& j, const std::string& context, const char* field) {
  if (!j.contains(field))
    throw ParseError(context + ": missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(context + "." + field + ": wrong type");
  }
}

}  // namespace

Json topology_to_json(const Topology& topo) {
  Json j;
  j["nodes"] = Json::array();
  for (const Node& n : topo.nodes())
    j["nodes"].push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))}});
  j["links"] = Json::array();
  for (const Link& l : topo.links())
    j["links"].push_back({{"id", l.id},
                          {"src", l.src},
                          {"dst", l.dst},
                          {"rate_bps", l.rate_bps},
                          {"prop_delay_ns", l.prop_delay_ns}});
  return j;
}

Topology topology_from_json(const Json& j) {
  std::vector<Node> nodes;
  std::vector<Link> links;
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw ParseError("topology: missing 'nodes' array");
  if (!j.contains("links") || !j.at("links").is_array())
    throw ParseError("topology: missing 'links' array");
  std::size_t i = 0;
  for (const Json& nj : j.at("nodes")) {
    const std::string ctx = "topology.nodes[" + std::to_string(i++) + "]";
    Node n;
    n.id = get_field<std::string>(nj, ctx, "id");
    try {
      n.kind = node_kind_from_string(get_field<std::string>(nj, ctx, "kind"));
    } catch (const std::invalid_argument& e) {
      throw ParseError(ctx + ".kind: " + e.what());
    }
    nodes.push_back(std::move(n));
  }
  i = 0;
  for (const Json& lj : j.at("links")) {
    const std::string ctx = "topology.links[" + std::to_string(i++) + "]";
    Link l;
    l.id = get_field<std::string>(lj, ctx, "id");
    l.src = get_field<std::string>(lj, ctx, "src");
    l.dst = get_field<std::string>(lj, ctx, "dst");
    l.rate_bps = get_field<std::int64_t>(lj, ctx, "rate_bps");
    l.prop_delay_ns = get_field<Ns>(lj, ctx, "prop_delay_ns");
    links.push_back(std::move(l));
  }
  try {
    return Topology(std::move(nodes), std::move(links));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

Topology load_topology(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return topology_from_json(j);
}

void save_topology(const Topology& topo, const std::filesystem::path& path) {
  write_text_file(path, topology_to_json(topo).dump(2) + "\n");
}

Json flows_to_json(std::span<const Flow> flows) {
  Json arr = Json::array();
  for (const Flow& f : flows) {
    Json j;
    j["id"] = f.id;
    j["criticality"] = std::string(to_string(f.criticality));
    j["period_ns"] = f.period;
    j["deadline_ns"] = f.deadline;
    j["payload_bytes"] = f.payload;
    j["src"] = f.src;
    j["dst"] = f.dst;
    j["route"] = f.route.links;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<Flow> flows_from_json(const Json& j, const Topology* topo) {
  if (!j.is_array()) throw ParseError("flows: expected a JSON array");
  std::vector<Flow> out;
  std::size_t i = 0;
  for (const Json& fj : j) {
    const std::string ctx = "flows[" + std::to_string(i++) + "]";
    Flow f;
    f.id = get_field<std::string>(fj, ctx, "id");
    try {
      f.criticality = criticality_from_string(get_field<std::string>(fj, ctx, "criticality"));
    } catch (const std::invalid_argument& e) {
      throw ParseError(ctx + ".criticality: " + e.what());
    }
    f.period = get_field<Ns>(fj, ctx, "period_ns");
    f.deadline = get_field<Ns>(fj, ctx, "deadline_ns");
    f.payload = get_field<std::int64_t>(fj, ctx, "payload_bytes");
    f.src = get_field<std::string>(fj, ctx, "src");
    f.dst = get_field<std::string>(fj, ctx, "dst");
    f.route.links = get_field<std::vector<std::string>>(fj, ctx, "route");

    if (f.period <= 0) throw ParseError(ctx + ".period_ns: must be positive");
    if (f.deadline <= 0) throw ParseError(ctx + ".deadline_ns: must be positive");
    if (f.deadline > f.period) throw ParseError(ctx + ".deadline_ns: deadline exceeds period");
    if (f.payload < 1 || f.payload > kMaxPayloadBytes)
      throw ParseError(ctx + ".payload_bytes: must be within [1, 1500]");
    if (topo != nullptr) {
      const std::vector<std::string> violations = flow_violations(f, *topo);
      if (!violations.empty()) throw ParseError(ctx + ": " + violations.front());
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Flow> load_flows(const std::filesystem::path& path, const Topology* topo) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return flows_from_json(j, topo);
}

void save_flows(std::span<const Flow> flows, const std::filesystem::path& path) {
  write_text_file(path, flows_to_json(flows).dump(2) + "\n");
}

Json schedule_result_to_json(const ScheduleResult& result) {
  Json j;
  j["algorithm"] = result.algorithm;
  j["frames"] = Json::array();
  for (const AggregateFrame& f : result.frames) {
    Json fj;
    fj["id"] = f.id;
    fj["members"] = f.members;
    fj["period_ns"] = f.period;
    fj["deadline_ns"] = f.deadline;
    fj["payload_bytes"] = f.payload;
    fj["route"] = f.route.links;
    fj["contains_critical"] = f.contains_critical;
    const bool accepted = result.schedule.accepted.contains(f.id);
    fj["accepted"] = accepted;
    if (accepted) {
      Json offs = Json::object();
      for (const std::string& lid : f.route.links)
        offs[lid] = result.schedule.offsets.at(f.id).at(lid);
      fj["offsets_ns"] = std::move(offs);
    }
    j["frames"].push_back(std::move(fj));
  }
  j["rejected_flows"] = Json::array();
  for (const FlowRejection& r : result.rejected_flows)
    j["rejected_flows"].push_back({{"flow", r.flow_id}, {"reason", r.reason}});
  j["reassembly"] = Json::array();
  for (const ReassemblyEvent& e : result.reassembly)
    j["reassembly"].push_back({{"flow", e.flow_id},
                               {"extracted_from", e.extracted_from},
                               {"rescheduled_as", e.rescheduled_as}});
  return j;
}

ScheduleResult schedule_result_from_json(const Json& j) {
  ScheduleResult out;
  out.algorithm = get_field<std::string>(j, "schedule", "algorithm");
  if (!j.contains("frames") || !j.at("frames").is_array())
    throw ParseError("schedule: missing 'frames' array");
  std::size_t i = 0;
  for (const Json& fj : j.at("frames")) {
    const std::string ctx = "schedule.frames[" + std::to_string(i++) + "]";
    AggregateFrame f;
    f.id = get_field<std::string>(fj, ctx, "id");
    f.members = get_field<std::vector<std::string>>(fj, ctx, "members");
    f.period = get_field<Ns>(fj, ctx, "period_ns");
    f.deadline = get_field<Ns>(fj, ctx, "deadline_ns");
    f.payload = get_field<std::int64_t>(fj, ctx, "payload_bytes");
    f.route.links = get_field<std::vector<std::string>>(fj, ctx, "route");
    f.contains_critical = get_field<bool>(fj, ctx, "contains_critical");
    const bool accepted = get_field<bool>(fj, ctx, "accepted");
    if (accepted) {
      out.schedule.accepted.insert(f.id);
      if (!fj.contains("offsets_ns"))
        throw ParseError(ctx + ": accepted frame without 'offsets_ns'");
      for (const auto& [lid, off] : fj.at("offsets_ns").items()) {
        if (!off.is_number_integer()) throw ParseError(ctx + ".offsets_ns." + lid + ": wrong type");
        out.schedule.offsets[f.id][lid] = off.get<Ns>();
      }
    } else {
      out.schedule.rejected.insert(f.id);
    }
    out.frames.push_back(std::move(f));
  }
  if (j.contains("rejected_flows")) {
    for (const Json& rj : j.at("rejected_flows"))
      out.rejected_flows.push_back({get_field<std::string>(rj, "rejected_flows", "flow"),
                                    get_field<std::string>(rj, "rejected_flows", "reason")});
  }
  if (j.contains("reassembly")) {
    for (const Json& ej : j.at("reassembly"))
      out.reassembly.push_back({get_field<std::string>(ej, "reassembly", "flow"),
                                get_field<std::string>(ej, "reassembly", "extracted_from"),
                                get_field<std::string>(ej, "reassembly", "rescheduled_as")});
  }
  return out;
}

ScheduleResult load_schedule_result(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return schedule_result_from_json(j);
}

void save_schedule_result(const ScheduleResult& result, const std::filesystem::path& path) {
  write_text_file(path, schedule_result_to_json(result).dump(2) + "\n");
}

Json aggregation_report_to_json(const AggregationResult& result) {
  Json j;
  j["clusters"] = Json::array();
  for (std::size_t i = 0; i < result.frames.size(); ++i) {
    const AggregateFrame& f = result.frames[i];
    j["clusters"].push_back({{"frame", f.id},
                             {"members", f.members},
                             {"period_ns", f.period},
                             {"deadline_ns", f.deadline},
                             {"payload_bytes", f.payload},
                             {"contains_critical", f.contains_critical}});
  }
  j["oversized"] = Json::array();
  for (const FlowRejection& r : result.oversized)
    j["oversized"].push_back({{"flow", r.flow_id}, {"reason", r.reason}});
  return j;
}

std::string gcl_to_csv(std::span<const GclEntry> entries) {
  std::string out = "port,queue,start_ns,end_ns,state\n";
  for (const GclEntry& e : entries) {
    out += e.link_id;
    out += ',';
    out += std::to_string(e.queue);
    out += ',';
    out += std::to_string(e.start);
    out += ',';
    out += std::to_string(e.end);
    out += ',';
    out += e.open ? "open" : "closed";
    out += '\n';
  }
  return out;
}

std::string metrics_csv_header() {
  return "algorithm,n_frames,seed,critical_acceptance,noncritical_acceptance,"
         "bandwidth_utilization,execution_time_s\n";
}

std::string metrics_csv_row(const RunMetrics& m) {
  std::string out = m.algorithm;
  out += ',';
  out += std::to_string(m.n_frames);
  out += ',';
  out += std::to_string(m.seed);
  out += ',';
  out += format_fixed(m.critical_acceptance, 9);
  out += ',';
  out += format_fixed(m.noncritical_acceptance, 9);
  out += ',';
  out += format_fixed(m.bandwidth_utilization, 9);
  out += ',';
  out += format_fixed(m.execution_time_s, 6);
  out += '\n';
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::string csv_without_columns(const std::string& csv, std::span<const std::string> drop) {
  std::istringstream in(csv);
  std::string header;
  if (!std::getline(in, header)) return csv;

  std::vector<std::string> columns;
  std::istringstream hs(header);
  std::string cell;
  while (std::getline(hs, cell, ',')) columns.push_back(cell);

  std::vector<bool> keep(columns.size(), true);
  for (std::size_t i = 0; i < columns.size(); ++i)
    for (const std::string& d : drop)
      if (columns[i] == d) keep[i] = false;

  std::string out;
  auto emit_row = [&](const std::string& line) {
    std::istringstream ls(line);
    std::string c;
    std::size_t idx = 0;
    bool first = true;
    while (std::getline(ls, c, ',')) {
      if (idx < keep.size() && keep[idx]) {
        if (!first) out += ',';
        out += c;
        first = false;
      }
      ++idx;
    }
    out += '\n';
  };
  emit_row(header);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    emit_row(line);
  }
  return out;
}

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace mcfs
