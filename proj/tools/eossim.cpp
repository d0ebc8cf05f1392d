#include <CLI11.hpp>

#include <iostream>

#include "eossim/metrics.hpp"
#include "eossim/scenario.hpp"

using namespace eossim;

// exit codes: 0 success, 1 findings/divergence/sim failure, 2 bad config or
// usage, 3 file system trouble

namespace {

int run_cmd(const std::string& scenario_path, std::int64_t seed_override,
            const std::string& out, const std::string& contracts, const std::string& read_mode,
            bool summary) {
  ScenarioSpec spec = parse_scenario_file(scenario_path);
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  if (!read_mode.empty()) {
    require(read_mode == "speculative" || read_mode == "head" || read_mode == "read_only" ||
                read_mode == "irreversible",
            errc::config_error, "read_mode: unknown mode '" + read_mode + "'");
    spec.read_mode = read_mode;
  }
  Trace tr = run_scenario(spec, contracts);
  if (!out.empty()) tr.save(out);
  if (summary) std::cout << metrics_summary_json(compute_metrics(tr)).dump(2) << "\n";
  if (out.empty() && !summary)
    std::cout << "events: " << tr.events.size() << "\n";
  return 0;
}

int lint_cmd(const std::vector<std::string>& paths) {
  bool any = false;
  for (const auto& p : paths) {
    ContractDef c = parse_contract_file(p);
    for (const auto& f : check_vulnerabilities(c)) {
      any = true;
      std::cout << p << ": " << vuln_class_name(f.vclass) << " in " << f.code.value
                << "::" << f.action << " (steps";
      for (int e : f.evidence) std::cout << " " << e;
      std::cout << ")\n";
    }
  }
  if (!any) std::cout << "clean\n";
  return any ? 1 : 0;
}

int report_cmd(const std::string& trace_path, const std::string& format,
               const std::string& out) {
  Trace tr = Trace::load(trace_path);
  MetricsReport r = compute_metrics(tr);
  if (format == "csv") {
    if (out.empty()) {
      std::cerr << "csv format needs --out DIR\n";
      return 2;
    }
    write_metrics_csv(r, out);
  } else {
    std::cout << metrics_summary_json(r).dump(2) << "\n";
  }
  return 0;
}

int replay_cmd(const std::string& trace_path, const std::string& contracts) {
  Trace tr = Trace::load(trace_path);
  std::int64_t idx = replay_trace(tr, contracts);
  if (idx < 0) {
    std::cout << "replay ok: " << tr.events.size() << " events match\n";
    return 0;
  }
  std::cout << "divergence at event " << idx << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic DPoS chain simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out, contracts = "contracts", read_mode, trace_path;
  std::string format = "json";
  std::int64_t seed = -1;
  bool summary = false;
  std::vector<std::string> lint_paths;

  auto* run = app.add_subcommand("run", "run a scenario and write its trace");
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed, "seed override");
  run->add_option("--out", out, "trace output path (jsonl)");
  run->add_option("--contracts", contracts, "contract descriptor directory");
  run->add_option("--read-mode", read_mode, "speculative|head|read_only|irreversible");
  run->add_flag("--summary", summary, "print the metrics summary");

  auto* lint = app.add_subcommand("lint", "static vulnerability check on contracts");
  lint->add_option("contracts", lint_paths, "contract files")->required();

  auto* report = app.add_subcommand("report", "metrics from a saved trace");
  report->add_option("--trace", trace_path, "trace file")->required();
  report->add_option("--format", format, "json|csv");
  report->add_option("--out", out, "csv output directory");

  auto* replay = app.add_subcommand("replay", "re-run a trace and compare");
  replay->add_option("--trace", trace_path, "trace file")->required();
  replay->add_option("--contracts", contracts, "contract descriptor directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_cmd(scenario_path, seed, out, contracts, read_mode, summary);
    if (lint->parsed()) return lint_cmd(lint_paths);
    if (report->parsed()) return report_cmd(trace_path, format, out);
    if (replay->parsed()) return replay_cmd(trace_path, contracts);
  } catch (const sim_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code == errc::io_error) return 3;
    if (e.code == errc::parse_error || e.code == errc::config_error ||
        e.code == errc::schema_mismatch)
      return 2;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
