#include "mcfs/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace mcfs {

namespace {

const std::vector<std::string> kTimingColumns = {"execution_time_s", "execution_time_mean_s",
                                                 "execution_time_stddev_s"};

std::string cell_rel_dir(Algo algo, int n, std::uint64_t seed) {
  return std::string(to_string(algo)) + "/" + std::to_string(n) + "/" + std::to_string(seed);
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  long double acc = 0;
  for (double x : xs) acc += x;
  return static_cast<double>(acc / xs.size());
}

double stddev_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  long double acc = 0;
  for (double x : xs) acc += (static_cast<long double>(x) - mean) * (x - mean);
  return static_cast<double>(std::sqrt(static_cast<double>(acc / (xs.size() - 1))));
}

int resolve_threads(int configured, std::size_t cells) {
  int t = configured;
  if (t <= 0) {
    if (const char* env = std::getenv("MCFS_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(cells, 1)));
}

// Hash with wall-clock timing columns stripped so reruns compare equal.
std::string artifact_hash(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  if (path.extension() == ".csv")
    return fnv1a64_hex(csv_without_columns(content, kTimingColumns));
  return fnv1a64_hex(content);
}

}  // namespace

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::Mcfs2l: return "mcfs2l";
    case Algo::Nwtt: return "nwtt";
    case Algo::Rnwtt: return "rnwtt";
  }
  return "unknown";
}

Algo algo_from_string(const std::string& name) {
  if (name == "mcfs2l") return Algo::Mcfs2l;
  if (name == "nwtt") return Algo::Nwtt;
  if (name == "rnwtt") return Algo::Rnwtt;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected mcfs2l|nwtt|rnwtt)");
}

ScenarioConfig benchmark_scenario() {
  ScenarioConfig config;
  config.name = "benchmark";
  config.aggregation.equal_periods_only = true;
  return config;
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["n_values"] = c.n_values;
  j["seeds"] = c.seeds;
  Json algos = Json::array();
  for (Algo a : c.algos) algos.push_back(std::string(to_string(a)));
  j["algos"] = std::move(algos);
  j["workload"] = {{"critical_fraction", c.workload.critical_fraction},
                   {"period_menu_ns", c.workload.period_menu},
                   {"deadline_min_ns", c.workload.deadline_min},
                   {"deadline_max_ns", c.workload.deadline_max},
                   {"payload_min_bytes", c.workload.payload_min},
                   {"payload_max_bytes", c.workload.payload_max}};
  j["scheduler"] = {{"step_ns", c.scheduler.step},
                    {"fast_forward", c.scheduler.fast_forward},
                    {"rnwtt_raw_deadline_range", c.scheduler.rnwtt_raw_deadline_range}};
  if (c.scheduler.rnwtt_max_attempts.has_value())
    j["scheduler"]["rnwtt_max_attempts"] = *c.scheduler.rnwtt_max_attempts;
  j["aggregation"] = {{"max_payload_bytes", c.aggregation.max_payload},
                      {"equal_periods_only", c.aggregation.equal_periods_only}};
  j["metrics"] = {{"normalize_per_link", c.metrics.normalize_per_link}};
  j["endpoints"] = {{"sources", c.endpoints.sources}, {"destination", c.endpoints.destination}};
  if (c.topology_path.has_value()) j["topology"] = *c.topology_path;
  if (c.flows_path.has_value()) j["flows"] = *c.flows_path;
  j["out"] = c.out_dir;
  j["threads"] = c.threads;
  return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig c;
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  if (j.contains("n_values")) c.n_values = j.at("n_values").get<std::vector<int>>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("algos")) {
    c.algos.clear();
    for (const Json& a : j.at("algos")) c.algos.push_back(algo_from_string(a.get<std::string>()));
  }
  if (j.contains("workload")) {
    const Json& w = j.at("workload");
    if (w.contains("critical_fraction"))
      c.workload.critical_fraction = w.at("critical_fraction").get<double>();
    if (w.contains("period_menu_ns"))
      c.workload.period_menu = w.at("period_menu_ns").get<std::vector<Ns>>();
    if (w.contains("deadline_min_ns")) c.workload.deadline_min = w.at("deadline_min_ns").get<Ns>();
    if (w.contains("deadline_max_ns")) c.workload.deadline_max = w.at("deadline_max_ns").get<Ns>();
    if (w.contains("payload_min_bytes"))
      c.workload.payload_min = w.at("payload_min_bytes").get<std::int64_t>();
    if (w.contains("payload_max_bytes"))
      c.workload.payload_max = w.at("payload_max_bytes").get<std::int64_t>();
  }
  if (j.contains("scheduler")) {
    const Json& s = j.at("scheduler");
    if (s.contains("step_ns")) c.scheduler.step = s.at("step_ns").get<Ns>();
    if (s.contains("fast_forward")) c.scheduler.fast_forward = s.at("fast_forward").get<bool>();
    if (s.contains("rnwtt_raw_deadline_range"))
      c.scheduler.rnwtt_raw_deadline_range = s.at("rnwtt_raw_deadline_range").get<bool>();
    if (s.contains("rnwtt_max_attempts"))
      c.scheduler.rnwtt_max_attempts = s.at("rnwtt_max_attempts").get<std::int64_t>();
  }
  if (j.contains("aggregation")) {
    const Json& a = j.at("aggregation");
    if (a.contains("max_payload_bytes"))
      c.aggregation.max_payload = a.at("max_payload_bytes").get<std::int64_t>();
    if (a.contains("equal_periods_only"))
      c.aggregation.equal_periods_only = a.at("equal_periods_only").get<bool>();
  }
  if (j.contains("metrics") && j.at("metrics").contains("normalize_per_link"))
    c.metrics.normalize_per_link = j.at("metrics").at("normalize_per_link").get<bool>();
  if (j.contains("endpoints")) {
    c.endpoints.sources = j.at("endpoints").at("sources").get<std::vector<std::string>>();
    c.endpoints.destination = j.at("endpoints").at("destination").get<std::string>();
  }
  if (j.contains("topology")) c.topology_path = j.at("topology").get<std::string>();
  if (j.contains("flows")) c.flows_path = j.at("flows").get<std::string>();
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  return c;
}

RunOutput run_single(Algo algo, std::span<const Flow> flows, const Topology& topo,
                     const SchedulerConfig& sched, const AggregationOptions& agg,
                     const MetricsOptions& mopts, std::uint64_t seed) {
  RunOutput out;
  SchedulerConfig cfg = sched;
  cfg.rng_seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  switch (algo) {
    case Algo::Mcfs2l: {
      out.aggregation = aggregate_all(flows, agg);
      out.result = schedule_mcfs2l(out.aggregation.frames, flows, topo, cfg, agg);
      for (const FlowRejection& r : out.aggregation.oversized)
        out.result.rejected_flows.push_back(r);
      break;
    }
    case Algo::Nwtt:
      out.result = schedule_nwtt(flows, topo, cfg);
      break;
    case Algo::Rnwtt:
      out.result = schedule_rnwtt(flows, topo, cfg);
      break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.execution_time_s = std::chrono::duration<double>(t1 - t0).count();

  out.violations = replay_verify(out.result.schedule, out.result.frames, topo);
  if (out.violations.empty())
    out.metrics = compute_metrics(out.result, flows, topo, out.execution_time_s, mopts, seed);
  return out;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  ScenarioOutcome outcome;
  const Topology topo = config.topology_path.has_value() ? load_topology(*config.topology_path)
                                                         : make_default_topology();

  std::vector<Flow> fixed_flows;
  if (config.flows_path.has_value()) fixed_flows = load_flows(*config.flows_path, &topo);

  struct Cell {
    Algo algo;
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  if (config.flows_path.has_value()) {
    for (Algo algo : config.algos)
      cells.push_back({algo, static_cast<int>(fixed_flows.size()), config.workload.rng_seed});
  } else {
    for (Algo algo : config.algos)
      for (int n : config.n_values)
        for (std::uint64_t seed : config.seeds) cells.push_back({algo, n, seed});
  }

  const std::filesystem::path scenario_dir =
      std::filesystem::path(config.out_dir) / config.name;
  std::filesystem::create_directories(scenario_dir);
  outcome.scenario_dir = scenario_dir;

  std::vector<CellResult> results(cells.size());
  std::vector<std::vector<std::string>> artifacts(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      if (failed.load()) continue;
      const Cell& cell = cells[i];

      std::vector<Flow> generated;
      std::span<const Flow> flows;
      if (config.flows_path.has_value()) {
        flows = fixed_flows;
      } else {
        WorkloadParams params = config.workload;
        params.n_frames = cell.n;
        params.rng_seed = cell.seed;
        generated = generate(params, topo, config.endpoints);
        flows = generated;
      }

      RunOutput run = run_single(cell.algo, flows, topo, config.scheduler, config.aggregation,
                                 config.metrics, cell.seed);
      if (!run.violations.empty()) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true)) {
          outcome.violations = run.violations;
          outcome.failed_cell = cell_rel_dir(cell.algo, cell.n, cell.seed);
        }
        continue;
      }

      const std::string rel = cell_rel_dir(cell.algo, cell.n, cell.seed);
      const std::filesystem::path dir = scenario_dir / rel;
      save_schedule_result(run.result, dir / "schedule.json");
      artifacts[i].push_back(rel + "/schedule.json");
      write_text_file(dir / "metrics.csv", metrics_csv_header() + metrics_csv_row(run.metrics));
      artifacts[i].push_back(rel + "/metrics.csv");
      write_text_file(dir / "gcl.csv",
                      gcl_to_csv(emit_gcl(run.result.schedule, run.result.frames, topo)));
      artifacts[i].push_back(rel + "/gcl.csv");
      if (cell.algo == Algo::Mcfs2l) {
        write_text_file(dir / "aggregation.json",
                        aggregation_report_to_json(run.aggregation).dump(2) + "\n");
        artifacts[i].push_back(rel + "/aggregation.json");
      }
      results[i] = {cell.algo, cell.n, cell.seed, run.metrics};
    }
  };

  const int n_threads = resolve_threads(config.threads, cells.size());
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  if (failed.load()) {
    outcome.exit_code = 3;
    return outcome;
  }

  outcome.cells = results;

  std::string runs_csv = metrics_csv_header();
  for (const CellResult& r : results) runs_csv += metrics_csv_row(r.metrics);
  write_text_file(scenario_dir / "runs.csv", runs_csv);

  const std::vector<SummaryRow> summary = summarize(results);
  write_text_file(scenario_dir / "summary.csv", summary_to_csv(summary));

  Json manifest;
  manifest["format"] = "mcfs-manifest-v1";
  manifest["scenario"] = scenario_to_json(config);
  manifest["hash_note"] = "execution_time columns are excluded from csv hashes";
  manifest["artifacts"] = Json::array();
  auto add_artifact = [&](const std::string& rel) {
    manifest["artifacts"].push_back(
        {{"path", rel}, {"fnv1a64", artifact_hash(scenario_dir / rel)}});
  };
  for (const auto& cell_files : artifacts)
    for (const std::string& rel : cell_files) add_artifact(rel);
  add_artifact("runs.csv");
  add_artifact("summary.csv");
  write_text_file(scenario_dir / "manifest.json", manifest.dump(2) + "\n");

  return outcome;
}

std::vector<SummaryRow> summarize(std::span<const CellResult> cells) {
  // Group in first-seen key order; scenario cells arrive as algorithms in
  // configured order with n ascending within each.
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<const CellResult*>> groups;
  for (const CellResult& c : cells) {
    const std::pair<std::string, int> key{std::string(to_string(c.algo)), c.n};
    if (!groups.contains(key)) keys.push_back(key);
    groups[key].push_back(&c);
  }

  std::vector<SummaryRow> out;
  for (const auto& key : keys) {
    const auto& group = groups[key];
    SummaryRow row;
    row.algorithm = key.first;
    row.n = key.second;
    row.runs = static_cast<int>(group.size());
    std::vector<double> crit, noncrit, bw, exec;
    for (const CellResult* c : group) {
      crit.push_back(c->metrics.critical_acceptance);
      noncrit.push_back(c->metrics.noncritical_acceptance);
      bw.push_back(c->metrics.bandwidth_utilization);
      exec.push_back(c->metrics.execution_time_s);
    }
    row.crit_mean = mean_of(crit);
    row.crit_stddev = stddev_of(crit, row.crit_mean);
    row.noncrit_mean = mean_of(noncrit);
    row.noncrit_stddev = stddev_of(noncrit, row.noncrit_mean);
    row.bw_mean = mean_of(bw);
    row.bw_stddev = stddev_of(bw, row.bw_mean);
    row.exec_mean = mean_of(exec);
    row.exec_stddev = stddev_of(exec, row.exec_mean);
    out.push_back(std::move(row));
  }
  return out;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
  std::string out =
      "algorithm,n_frames,runs,critical_acceptance_mean,critical_acceptance_stddev,"
      "noncritical_acceptance_mean,noncritical_acceptance_stddev,"
      "bandwidth_utilization_mean,bandwidth_utilization_stddev,"
      "execution_time_mean_s,execution_time_stddev_s\n";
  for (const SummaryRow& r : rows) {
    out += r.algorithm;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.runs);
    out += ',';
    out += format_fixed(r.crit_mean, 9);
    out += ',';
    out += format_fixed(r.crit_stddev, 9);
    out += ',';
    out += format_fixed(r.noncrit_mean, 9);
    out += ',';
    out += format_fixed(r.noncrit_stddev, 9);
    out += ',';
    out += format_fixed(r.bw_mean, 9);
    out += ',';
    out += format_fixed(r.bw_stddev, 9);
    out += ',';
    out += format_fixed(r.exec_mean, 6);
    out += ',';
    out += format_fixed(r.exec_stddev, 6);
    out += '\n';
  }
  return out;
}

std::vector<SummaryRow> summary_from_csv(const std::string& csv) {
  std::vector<SummaryRow> out;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (cols.size() != 11) throw ParseError("summary csv: expected 11 columns");
    SummaryRow r;
    r.algorithm = cols[0];
    r.n = std::stoi(cols[1]);
    r.runs = std::stoi(cols[2]);
    r.crit_mean = std::stod(cols[3]);
    r.crit_stddev = std::stod(cols[4]);
    r.noncrit_mean = std::stod(cols[5]);
    r.noncrit_stddev = std::stod(cols[6]);
    r.bw_mean = std::stod(cols[7]);
    r.bw_stddev = std::stod(cols[8]);
    r.exec_mean = std::stod(cols[9]);
    r.exec_stddev = std::stod(cols[10]);
    out.push_back(std::move(r));
  }
  return out;
}

CompareTable compare(std::span<const std::filesystem::path> scenario_dirs) {
  CompareTable table;
  if (scenario_dirs.empty()) return table;

  // Sections that must agree for summaries to be comparable.
  const std::vector<std::string> kSections = {"workload", "scheduler", "aggregation", "metrics",
                                              "seeds", "endpoints"};
  Json reference;
  std::vector<SummaryRow> merged;
  for (const std::filesystem::path& dir : scenario_dirs) {
    Json manifest;
    try {
      manifest = Json::parse(read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError((dir / "manifest.json").string() + ": " + e.what());
    }
    const Json& scenario = manifest.at("scenario");
    if (reference.is_null()) {
      reference = scenario;
    } else {
      std::string diff;
      for (const std::string& section : kSections) {
        const Json a = reference.contains(section) ? reference.at(section) : Json();
        const Json b = scenario.contains(section) ? scenario.at(section) : Json();
        if (a != b)
          diff += "  " + section + ": " + a.dump() + " vs " + b.dump() + "\n";
      }
      if (!diff.empty()) throw CompareMismatch(diff);
    }
    for (SummaryRow& row : summary_from_csv(read_text_file(dir / "summary.csv")))
      merged.push_back(std::move(row));
  }

  // Later duplicates of the same (algorithm, n) must agree: identical inputs
  // produce identical summaries, anything else is a mismatch.
  std::map<std::pair<std::string, int>, SummaryRow> rows;
  for (const SummaryRow& r : merged) {
    const auto key = std::make_pair(r.algorithm, r.n);
    auto it = rows.find(key);
    if (it == rows.end()) {
      rows.emplace(key, r);
    } else if (it->second.crit_mean != r.crit_mean || it->second.noncrit_mean != r.noncrit_mean ||
               it->second.bw_mean != r.bw_mean || it->second.runs != r.runs) {
      throw CompareMismatch("  summary rows for (" + r.algorithm + ", " + std::to_string(r.n) +
                            ") disagree\n");
    }
  }

  std::set<int> ns;
  for (const auto& [key, row] : rows) ns.insert(key.second);
  const std::vector<std::pair<std::string, const char*>> metrics = {
      {"critical_acceptance", "crit"},
      {"noncritical_acceptance", "noncrit"},
      {"bandwidth_utilization", "bw"}};
  for (int n : ns) {
    for (const auto& [metric, tag] : metrics) {
      CompareTable::Row row;
      row.n = n;
      row.metric = metric;
      for (const auto& [key, summary] : rows) {
        if (key.second != n) continue;
        double v = 0;
        if (metric == "critical_acceptance") v = summary.crit_mean;
        else if (metric == "noncritical_acceptance") v = summary.noncrit_mean;
        else v = summary.bw_mean;
        row.value[key.first] = v;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string CompareTable::to_csv() const {
  std::string out = "n_frames,metric,mcfs2l,nwtt,mcfs2l_minus_nwtt,rnwtt,mcfs2l_minus_rnwtt\n";
  for (const Row& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += r.metric;
    const auto get = [&](const char* name) -> std::optional<double> {
      auto it = r.value.find(name);
      return it == r.value.end() ? std::nullopt : std::optional<double>(it->second);
    };
    const std::optional<double> m = get("mcfs2l"), nw = get("nwtt"), rn = get("rnwtt");
    auto emit = [&](std::optional<double> v) {
      out += ',';
      if (v.has_value()) out += format_fixed(*v, 9);
    };
    emit(m);
    emit(nw);
    emit(m.has_value() && nw.has_value() ? std::optional<double>(*m - *nw) : std::nullopt);
    emit(rn);
    emit(m.has_value() && rn.has_value() ? std::optional<double>(*m - *rn) : std::nullopt);
    out += '\n';
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& spec) {
  std::vector<std::int64_t> out;
  std::istringstream in(spec);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) throw std::invalid_argument("empty element in list '" + spec + "'");
    const std::size_t dots = token.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoll(token));
        continue;
      }
      const std::int64_t lo = std::stoll(token.substr(0, dots));
      std::string rest = token.substr(dots + 2);
      std::int64_t step = 1;
      const std::size_t colon = rest.find(':');
      if (colon != std::string::npos) {
        step = std::stoll(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      const std::int64_t hi = std::stoll(rest);
      if (step <= 0) throw std::invalid_argument("range step must be positive in '" + spec + "'");
      if (hi < lo) throw std::invalid_argument("descending range in '" + spec + "'");
      for (std::int64_t v = lo; v <= hi; v += step) out.push_back(v);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("cannot parse integer list '" + spec + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty integer list '" + spec + "'");
  return out;
}

}  // namespace mcfs
