#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcfs/scheduler.hpp"
#include "mcfs/verify.hpp"

namespace mcfs {

// ordered_json keeps key order stable so emitted files are byte-reproducible.
using Json = nlohmann::ordered_json;

// Thrown for malformed input files; messages carry record/field diagnostics.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json topology_to_json(const Topology& topo);
Topology topology_from_json(const Json& j);
Topology load_topology(const std::filesystem::path& path);
void save_topology(const Topology& topo, const std::filesystem::path& path);

Json flows_to_json(std::span<const Flow> flows);
// topo, when given, additionally validates routes against it.
std::vector<Flow> flows_from_json(const Json& j, const Topology* topo = nullptr);
std::vector<Flow> load_flows(const std::filesystem::path& path, const Topology* topo = nullptr);
void save_flows(std::span<const Flow> flows, const std::filesystem::path& path);

Json schedule_result_to_json(const ScheduleResult& result);
ScheduleResult schedule_result_from_json(const Json& j);
ScheduleResult load_schedule_result(const std::filesystem::path& path);
void save_schedule_result(const ScheduleResult& result, const std::filesystem::path& path);

Json aggregation_report_to_json(const AggregationResult& result);

std::string gcl_to_csv(std::span<const GclEntry> entries);
std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Drops the named columns from a CSV; used to exclude wall-clock timing from
// reproducibility hashes.
std::string csv_without_columns(const std::string& csv, std::span<const std::string> drop);

std::string fnv1a64_hex(const std::string& data);

std::string format_fixed(double value, int digits);

}  // namespace mcfs
