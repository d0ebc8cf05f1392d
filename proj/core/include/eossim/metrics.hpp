#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "eossim/trace.hpp"
#include "eossim/name.hpp"

namespace eossim {

// Post-hoc analytics over traces. All pure functions of the event log:
// recomputing from a persisted trace file equals in-run computation exactly.

struct TpsWindow {
  Ms window_start = 0;
  std::int64_t transactions = 0;
  double tps = 0.0;
};

struct ThroughputReport {
  std::vector<TpsWindow> series;
  std::int64_t total_transactions = 0;
  std::int64_t total_actions = 0;
  std::int64_t total_blocks = 0;
  double avg_tx_per_block = 0.0;
  double avg_actions_per_tx = 0.0;
  double avg_tps = 0.0;
};

ThroughputReport throughput(const Trace& t, Ms window_ms);  // throws empty_trace

double shannon_entropy_bits(const std::map<AccountName, std::int64_t>& shares);  // throws empty_distribution
double gini(std::vector<double> values);                                         // throws empty_distribution

// Jaccard distance of consecutive producer sets; throws too_few_rounds.
std::vector<double> producer_churn(const std::vector<std::set<AccountName>>& schedules);

struct FinalityDrift {
  // per block: production event time, block timestamp, irreversibility time
  struct PerBlock {
    BlockNum number = 0;
    Ms produced_at = 0;
    Ms timestamp = 0;
    Ms irreversible_at = -1;  // -1: never within the trace
    Ms drift = 0;             // timestamp - produced_at
  };
  std::vector<PerBlock> blocks;
  Ms finality_p50 = -1, finality_p90 = -1, finality_p100 = -1;
  Ms max_abs_drift = 0;
};

FinalityDrift finality_and_drift(const Trace& t);  // throws empty_trace

struct MetricsReport {
  ThroughputReport tput;
  FinalityDrift fin;
  std::map<AccountName, std::int64_t> producer_block_share;
  double entropy_bits = 0.0;
  double gini_coefficient = 0.0;
  std::vector<std::set<AccountName>> schedules;
  std::vector<double> churn;  // empty when < 2 rounds
  std::map<std::string, std::int64_t> rejections_by_error;
  Ms cpu_ms_total = 0;
  Words net_words_total = 0;
};

MetricsReport compute_metrics(const Trace& t, Ms window_ms = 10'000);

json metrics_summary_json(const MetricsReport& r);
// Writes tps.csv, finality.csv, drift.csv, shares.csv, churn.csv,
// rejections.csv into `dir` (created if needed).
void write_metrics_csv(const MetricsReport& r, const std::string& dir);

}  // namespace eossim
