// Command-line front end: workload generation, scenario sweeps, schedule
// verification, and summary comparison.
//
// Exit codes: 0 ok, 2 configuration error, 3 replay verification failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mcfs/runner.hpp"

namespace {

using namespace mcfs;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerification = 3;

struct WorkloadFlags {
  double critical_fraction = -1;
  std::string deadline_range;  // "lo..hi" in ns
  std::string payload_range;   // "lo..hi" in bytes
  std::string period_menu;     // comma list in ns

  void apply(WorkloadParams& params) const {
    if (critical_fraction >= 0) params.critical_fraction = critical_fraction;
    if (!deadline_range.empty()) {
      const auto values = parse_int_list(deadline_range);
      params.deadline_min = values.front();
      params.deadline_max = values.back();
    }
    if (!payload_range.empty()) {
      const auto values = parse_int_list(payload_range);
      params.payload_min = values.front();
      params.payload_max = values.back();
    }
    if (!period_menu.empty()) {
      params.period_menu.clear();
      for (std::int64_t v : parse_int_list(period_menu)) params.period_menu.push_back(v);
    }
  }
};

void add_workload_flags(CLI::App* cmd, WorkloadFlags& flags) {
  cmd->add_option("--critical-fraction", flags.critical_fraction,
                  "Fraction of flows marked critical (default 0.5)");
  cmd->add_option("--deadline-range-ns", flags.deadline_range,
                  "Deadline range as LO..HI in ns (default 8000000..12000000)");
  cmd->add_option("--payload-range", flags.payload_range,
                  "Payload range as LO..HI in bytes (default 100..300)");
  cmd->add_option("--period-menu-ns", flags.period_menu,
                  "Comma list of period choices in ns");
}

int cmd_gen(const std::string& out_path, int n, std::uint64_t seed,
            const std::string& topology_path, const WorkloadFlags& flags,
            const std::string& sources, const std::string& destination) {
  const Topology topo =
      topology_path.empty() ? make_default_topology() : load_topology(topology_path);
  EndpointSets endpoints = default_endpoints();
  if (!sources.empty()) {
    endpoints.sources.clear();
    std::istringstream ss(sources);
    std::string s;
    while (std::getline(ss, s, ',')) endpoints.sources.push_back(s);
  }
  if (!destination.empty()) endpoints.destination = destination;

  WorkloadParams params;
  params.n_frames = n;
  params.rng_seed = seed;
  flags.apply(params);
  const std::vector<Flow> flows = generate(params, topo, endpoints);
  save_flows(flows, out_path);
  std::printf("wrote %zu flows to %s\n", flows.size(), out_path.c_str());
  return kExitOk;
}

int cmd_run(ScenarioConfig config) {
  const ScenarioOutcome outcome = run_scenario(config);
  if (outcome.exit_code != 0) {
    std::fprintf(stderr, "replay verification failed for cell %s\n",
                 outcome.failed_cell.c_str());
    for (const ConstraintViolation& v : outcome.violations)
      std::fprintf(stderr, "  %s\n", v.message().c_str());
    return kExitVerification;
  }
  const std::vector<SummaryRow> summary = summarize(outcome.cells);
  std::fputs(summary_to_csv(summary).c_str(), stdout);
  std::printf("results under %s\n", outcome.scenario_dir.string().c_str());
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const CompareTable table = compare(paths);
  const std::string csv = table.to_csv();
  std::fputs(csv.c_str(), stdout);
  if (!out_path.empty()) write_text_file(out_path, csv);
  return kExitOk;
}

int cmd_verify(const std::string& schedule_path, const std::string& topology_path) {
  const Topology topo =
      topology_path.empty() ? make_default_topology() : load_topology(topology_path);
  const ScheduleResult result = load_schedule_result(schedule_path);
  const std::vector<ConstraintViolation> violations =
      replay_verify(result.schedule, result.frames, topo);
  if (violations.empty()) {
    std::printf("ok: %zu accepted frames, %zu rejected\n", result.schedule.accepted.size(),
                result.schedule.rejected.size());
    return kExitOk;
  }
  std::fprintf(stderr, "%zu violation(s)\n", violations.size());
  for (const ConstraintViolation& v : violations)
    std::fprintf(stderr, "  %s\n", v.message().c_str());
  return kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-criticality TT flow scheduling: MCFS-2L, NWTT, R-NWTT"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic flow-set file");
  std::string gen_out = "flows.json";
  int gen_n = 100;
  std::uint64_t gen_seed = 1;
  std::string gen_topology, gen_sources, gen_dest;
  WorkloadFlags gen_flags;
  gen->add_option("--out", gen_out, "Output flow-set JSON path");
  gen->add_option("--n", gen_n, "Number of flows");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--topology", gen_topology, "Topology JSON (default: 3-DCU star)");
  gen->add_option("--sources", gen_sources, "Comma list of source endpoints");
  gen->add_option("--dest", gen_dest, "Destination endpoint");
  add_workload_flags(gen, gen_flags);

  // run
  auto* run = app.add_subcommand("run", "Run a scheduling scenario sweep");
  std::string run_n, run_seeds, run_algos, run_topology, run_flows, run_out, run_name;
  std::string run_scenario_file, run_manifest;
  std::int64_t run_step = 0;
  bool run_equal_periods = false, run_normalize = false, run_no_fast_forward = false;
  bool run_rnwtt_raw = false;
  int run_threads = 0;
  WorkloadFlags run_wflags;
  run->add_option("--n", run_n, "Frame counts: list or range (e.g. 50,100 or 50..500:50)");
  run->add_option("--seeds", run_seeds, "Seeds: list or range (e.g. 1..20)");
  run->add_option("--algos", run_algos, "Comma list of mcfs2l,nwtt,rnwtt");
  run->add_option("--topology", run_topology, "Topology JSON (default: 3-DCU star)");
  run->add_option("--flows", run_flows, "Fixed flow-set JSON (disables generation)");
  run->add_option("--step-ns", run_step, "Offset increment unit in ns (default 1000)");
  run->add_flag("--aggregate-equal-periods-only", run_equal_periods,
                "Cluster only flows with identical periods");
  run->add_flag("--normalize-per-link", run_normalize,
                "Divide bandwidth utilization by the link count");
  run->add_flag("--no-fast-forward", run_no_fast_forward,
                "Advance strictly by --step-ns instead of jumping over blockers");
  run->add_flag("--rnwtt-raw-range", run_rnwtt_raw,
                "R-NWTT samples within [0, deadline] instead of [0, deadline - latency]");
  run->add_option("--threads", run_threads, "Worker threads (also MCFS_THREADS env)");
  run->add_option("--out", run_out, "Output directory (default out)");
  run->add_option("--name", run_name, "Scenario name (default scenario)");
  run->add_option("--scenario", run_scenario_file, "Scenario config JSON to start from");
  run->add_option("--from-manifest", run_manifest, "Re-run the scenario of a manifest.json");
  add_workload_flags(run, run_wflags);

  // compare
  auto* cmp = app.add_subcommand("compare", "Join scenario summaries and emit deltas");
  std::vector<std::string> cmp_dirs;
  std::string cmp_out;
  cmp->add_option("dirs", cmp_dirs, "Scenario output directories");
  cmp->add_option("--out", cmp_out, "Write the table to this CSV path");

  // verify
  auto* ver = app.add_subcommand("verify", "Replay-verify a schedule file");
  std::string ver_schedule, ver_topology;
  ver->add_option("--schedule", ver_schedule, "schedule.json produced by run")->required();
  ver->add_option("--topology", ver_topology, "Topology JSON (default: 3-DCU star)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_out, gen_n, gen_seed, gen_topology, gen_flags, gen_sources, gen_dest);

    if (run->parsed()) {
      ScenarioConfig config;
      if (!run_manifest.empty()) {
        const Json manifest = Json::parse(read_text_file(run_manifest));
        config = scenario_from_json(manifest.at("scenario"));
      } else if (!run_scenario_file.empty()) {
        config = scenario_from_json(Json::parse(read_text_file(run_scenario_file)));
      }
      if (!run_n.empty()) {
        config.n_values.clear();
        for (std::int64_t v : parse_int_list(run_n)) config.n_values.push_back(static_cast<int>(v));
      }
      if (!run_seeds.empty()) {
        config.seeds.clear();
        for (std::int64_t v : parse_int_list(run_seeds))
          config.seeds.push_back(static_cast<std::uint64_t>(v));
      }
      if (!run_algos.empty()) {
        config.algos.clear();
        std::istringstream ss(run_algos);
        std::string a;
        while (std::getline(ss, a, ',')) config.algos.push_back(algo_from_string(a));
      }
      if (!run_topology.empty()) config.topology_path = run_topology;
      if (!run_flows.empty()) config.flows_path = run_flows;
      if (run_step > 0) config.scheduler.step = run_step;
      if (run_no_fast_forward) config.scheduler.fast_forward = false;
      if (run_rnwtt_raw) config.scheduler.rnwtt_raw_deadline_range = true;
      if (run_equal_periods) config.aggregation.equal_periods_only = true;
      if (run_normalize) config.metrics.normalize_per_link = true;
      if (run_threads > 0) config.threads = run_threads;
      if (!run_out.empty()) config.out_dir = run_out;
      if (!run_name.empty()) config.name = run_name;
      run_wflags.apply(config.workload);
      return cmd_run(std::move(config));
    }

    if (cmp->parsed()) return cmd_compare(cmp_dirs, cmp_out);
    if (ver->parsed()) return cmd_verify(ver_schedule, ver_topology);
  } catch (const CompareMismatch& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
