#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcfs/baselines.hpp"
#include "mcfs/json_io.hpp"
#include "mcfs/verify.hpp"
#include "mcfs/workload.hpp"

namespace mcfs {

enum class Algo { Mcfs2l, Nwtt, Rnwtt };

std::string_view to_string(Algo algo);
Algo algo_from_string(const std::string& name);

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<int> n_values = {50, 100, 150, 200, 250, 300, 350, 400, 450, 500};
  std::vector<std::uint64_t> seeds = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                                      11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::vector<Algo> algos = {Algo::Mcfs2l, Algo::Nwtt, Algo::Rnwtt};
  WorkloadParams workload;          // n_frames and rng_seed overridden per cell
  SchedulerConfig scheduler;        // rng_seed overridden per cell
  AggregationOptions aggregation;
  MetricsOptions metrics;
  EndpointSets endpoints = default_endpoints();
  std::optional<std::string> topology_path;  // default star when absent
  std::optional<std::string> flows_path;     // fixed flow-set mode
  std::string out_dir = "out";
  int threads = 0;  // 0: MCFS_THREADS env var, then hardware concurrency
};

// The frozen benchmark configuration the acceptance runs use. Workload
// defaults are the calibrated ones; aggregation is restricted to equal
// periods so the utilization comparison isolates header savings.
ScenarioConfig benchmark_scenario();

Json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const Json& j);

struct RunOutput {
  ScheduleResult result;
  AggregationResult aggregation;  // populated for mcfs2l
  std::vector<ConstraintViolation> violations;
  RunMetrics metrics;  // valid only when violations is empty
  double execution_time_s = 0.0;
};

// One (algorithm, workload) execution: schedule (timed), replay-verify,
// compute metrics. For mcfs2l the timer covers aggregation + scheduling.
RunOutput run_single(Algo algo, std::span<const Flow> flows, const Topology& topo,
                     const SchedulerConfig& sched, const AggregationOptions& agg,
                     const MetricsOptions& mopts, std::uint64_t seed);

struct CellResult {
  Algo algo = Algo::Mcfs2l;
  int n = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct ScenarioOutcome {
  int exit_code = 0;  // 0 ok, 3 replay verification failure
  std::filesystem::path scenario_dir;
  std::vector<CellResult> cells;
  std::string failed_cell;  // "<algo>/<n>/<seed>" on exit 3
  std::vector<ConstraintViolation> violations;
};

ScenarioOutcome run_scenario(const ScenarioConfig& config);

struct SummaryRow {
  std::string algorithm;
  int n = 0;
  int runs = 0;
  double crit_mean = 0, crit_stddev = 0;
  double noncrit_mean = 0, noncrit_stddev = 0;
  double bw_mean = 0, bw_stddev = 0;
  double exec_mean = 0, exec_stddev = 0;
};

std::vector<SummaryRow> summarize(std::span<const CellResult> cells);
std::string summary_to_csv(std::span<const SummaryRow> rows);
std::vector<SummaryRow> summary_from_csv(const std::string& csv);

class CompareMismatch : public std::runtime_error {
 public:
  explicit CompareMismatch(const std::string& diff)
      : std::runtime_error("scenario manifests do not match:\n" + diff) {}
};

struct CompareTable {
  // One row per (n, metric): mcfs2l value and deltas against each baseline.
  struct Row {
    int n = 0;
    std::string metric;
    std::map<std::string, double> value;  // per algorithm name
  };
  std::vector<Row> rows;

  std::string to_csv() const;
};

// Joins the summaries of one or more scenario output directories. Refuses
// (CompareMismatch) when their manifests disagree on workload, scheduler,
// aggregation, metrics options, or seed list.
CompareTable compare(std::span<const std::filesystem::path> scenario_dirs);

// "42", "50,100", "1..10", "50..500:50".
std::vector<std::int64_t> parse_int_list(const std::string& spec);

}  // namespace mcfs
