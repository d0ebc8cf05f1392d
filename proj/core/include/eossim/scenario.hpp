#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eossim/netsim.hpp"

namespace eossim {

// Scenario files: structured text with [topology], [producers], [accounts],
// [resources], [workload], [attack] sections. Parse errors cite line numbers;
// semantic errors carry the offending key path (e.g. "workload.sender").
// Format reference: docs/scenario-format.md.

struct AccountDecl {
  AccountName name;
  Tokens balance = 0;
  Tokens stake_cpu = 0;
  Tokens stake_net = 0;
  Tokens ram_purchase = 0;   // beyond the creation footprint
  std::string contract;      // contract name in the registry, "" = none
  int node = 0;              // home node (push origin)
};

struct WorkloadSpec {
  std::int64_t tx_rate_centi = 0;  // hundredths of tx per second
  AccountName sender;
  AccountName receiver;
  Tokens amount = 10'000;
  Ms start = 0;
  Ms stop = -1;  // -1: run for the whole duration
};

struct AttackConfig {
  std::string kind = "none";
  std::map<std::string, std::string> params;

  bool enabled() const { return kind != "none"; }
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::string get_str(const std::string& key, const std::string& def) const;
};

struct ScenarioSpec {
  std::string name;
  Ms duration = 0;
  std::uint64_t seed = 0;
  std::string read_mode = "head";  // speculative | head | read_only | irreversible
  std::string source_text;         // verbatim file content, embedded in traces

  // [topology]
  int nodes = 1;
  Ms latency_min = 0, latency_max = 0;
  int drop_per_mille = 0;

  // [producers]
  int producer_count = 21;
  int slots_per_producer = 12;
  Tokens producer_stake = 1'000'000'0000LL;
  std::string dpos_mode = "bft";  // or "plain"
  Ms cpu_budget = 200;
  Words net_budget = 100'000;
  std::vector<AccountName> offline;  // producers that never produce

  std::vector<AccountDecl> accounts;
  ResourceParams resources;
  std::optional<WorkloadSpec> workload;
  AttackConfig attack;
};

ScenarioSpec parse_scenario(const std::string& text, const std::string& name);
ScenarioSpec parse_scenario_file(const std::string& path);

// Deterministic producer names bpaaaa, bpaaab, ... (sorted = slot order).
std::vector<AccountName> producer_names(int count);

// Builds genesis, runs the network to `duration`, returns the trace. Contract
// descriptors referenced by account declarations and attacks are loaded from
// `contract_dir`. Throws config_error with a field path on bad specs.
Trace run_scenario(const ScenarioSpec& spec, const std::string& contract_dir);

// Re-runs the scenario embedded in the trace header and byte-compares event
// streams. Returns the index of the first divergent event, or -1 on success.
std::int64_t replay_trace(const Trace& golden, const std::string& contract_dir);

}  // namespace eossim
