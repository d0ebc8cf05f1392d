#include "eossim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace eossim {

ThroughputReport throughput(const Trace& t, Ms window_ms) {
  ThroughputReport r;
  Ms last_ts = 0;
  std::map<Ms, std::int64_t> buckets;
  for (const auto& e : t.events) {
    if (e.kind != "block") continue;
    ++r.total_blocks;
    std::int64_t txs = e.fields.at("tx_count").get<std::int64_t>();
    r.total_transactions += txs;
    r.total_actions += e.fields.value("action_count", txs);
    Ms ts = e.fields.at("timestamp").get<Ms>();
    last_ts = std::max(last_ts, ts);
    buckets[(ts / window_ms) * window_ms] += txs;
  }
  require(r.total_blocks > 0, errc::empty_trace, "no block events");
  for (Ms w = 0; w <= last_ts; w += window_ms) {
    TpsWindow win;
    win.window_start = w;
    win.transactions = buckets.count(w) ? buckets[w] : 0;
    win.tps = static_cast<double>(win.transactions) * 1000.0 / static_cast<double>(window_ms);
    r.series.push_back(win);
  }
  r.avg_tx_per_block =
      static_cast<double>(r.total_transactions) / static_cast<double>(r.total_blocks);
  r.avg_actions_per_tx =
      r.total_transactions > 0
          ? static_cast<double>(r.total_actions) / static_cast<double>(r.total_transactions)
          : 0.0;
  r.avg_tps = last_ts > 0
                  ? static_cast<double>(r.total_transactions) * 1000.0 /
                        static_cast<double>(last_ts)
                  : 0.0;
  return r;
}

double shannon_entropy_bits(const std::map<AccountName, std::int64_t>& shares) {
  double total = 0;
  for (const auto& [k, v] : shares) total += static_cast<double>(v);
  require(!shares.empty() && total > 0, errc::empty_distribution, "entropy of nothing");
  double h = 0;
  for (const auto& [k, v] : shares) {
    if (v <= 0) continue;
    double p = static_cast<double>(v) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double gini(std::vector<double> values) {
  require(!values.empty(), errc::empty_distribution, "gini of nothing");
  std::sort(values.begin(), values.end());
  double sum = 0, weighted = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    weighted += static_cast<double>(i + 1) * values[i];
  }
  if (sum == 0) return 0.0;
  double n = static_cast<double>(values.size());
  return (2.0 * weighted) / (n * sum) - (n + 1.0) / n;
}

std::vector<double> producer_churn(const std::vector<std::set<AccountName>>& schedules) {
  require(schedules.size() >= 2, errc::too_few_rounds, std::to_string(schedules.size()));
  std::vector<double> out;
  for (std::size_t i = 1; i < schedules.size(); ++i) {
    const auto& a = schedules[i - 1];
    const auto& b = schedules[i];
    std::size_t inter = 0;
    for (const auto& x : a)
      if (b.count(x)) ++inter;
    std::size_t uni = a.size() + b.size() - inter;
    out.push_back(uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni));
  }
  return out;
}

FinalityDrift finality_and_drift(const Trace& t) {
  FinalityDrift r;
  std::map<BlockNum, std::size_t> index;
  for (const auto& e : t.events) {
    if (e.kind == "block") {
      FinalityDrift::PerBlock pb;
      pb.number = e.fields.at("number").get<BlockNum>();
      pb.produced_at = e.fields.at("produced_at").get<Ms>();
      pb.timestamp = e.fields.at("timestamp").get<Ms>();
      pb.drift = pb.timestamp - pb.produced_at;
      index[pb.number] = r.blocks.size();
      r.blocks.push_back(pb);
    } else if (e.kind == "irreversible") {
      auto num = e.fields.at("number").get<BlockNum>();
      auto it = index.find(num);
      if (it != index.end()) r.blocks[it->second].irreversible_at = e.t;
    }
  }
  require(!r.blocks.empty(), errc::empty_trace, "no block events");
  std::vector<Ms> lat;
  for (const auto& pb : r.blocks) {
    r.max_abs_drift = std::max(r.max_abs_drift, pb.drift < 0 ? -pb.drift : pb.drift);
    if (pb.irreversible_at >= 0) lat.push_back(pb.irreversible_at - pb.produced_at);
  }
  if (!lat.empty()) {
    std::sort(lat.begin(), lat.end());
    auto pct = [&](int p) { return lat[(lat.size() - 1) * p / 100]; };
    r.finality_p50 = pct(50);
    r.finality_p90 = pct(90);
    r.finality_p100 = lat.back();
  }
  return r;
}

MetricsReport compute_metrics(const Trace& t, Ms window_ms) {
  MetricsReport r;
  r.tput = throughput(t, window_ms);
  r.fin = finality_and_drift(t);
  for (const auto& e : t.events) {
    if (e.kind == "block") {
      r.producer_block_share[AccountName(e.fields.at("producer").get<std::string>())] += 1;
      r.cpu_ms_total += e.fields.at("cpu").get<Ms>();
      r.net_words_total += e.fields.at("net").get<Words>();
    } else if (e.kind == "schedule") {
      std::set<AccountName> s;
      for (const auto& p : e.fields.at("producers")) s.insert(AccountName(p.get<std::string>()));
      r.schedules.push_back(std::move(s));
    } else if (e.kind == "tx_rejected") {
      r.rejections_by_error[e.fields.at("error").get<std::string>()] += 1;
    }
  }
  r.entropy_bits = shannon_entropy_bits(r.producer_block_share);
  std::vector<double> vals;
  for (const auto& [k, v] : r.producer_block_share) vals.push_back(static_cast<double>(v));
  r.gini_coefficient = gini(vals);
  if (r.schedules.size() >= 2) r.churn = producer_churn(r.schedules);
  return r;
}

json metrics_summary_json(const MetricsReport& r) {
  json j;
  j["blocks"] = r.tput.total_blocks;
  j["transactions"] = r.tput.total_transactions;
  j["actions"] = r.tput.total_actions;
  j["avg_tps"] = r.tput.avg_tps;
  j["avg_tx_per_block"] = r.tput.avg_tx_per_block;
  j["avg_actions_per_tx"] = r.tput.avg_actions_per_tx;
  j["finality_p50_ms"] = r.fin.finality_p50;
  j["finality_p90_ms"] = r.fin.finality_p90;
  j["finality_p100_ms"] = r.fin.finality_p100;
  j["max_abs_drift_ms"] = r.fin.max_abs_drift;
  j["producer_entropy_bits"] = r.entropy_bits;
  j["producer_gini"] = r.gini_coefficient;
  json shares;
  for (const auto& [p, c] : r.producer_block_share) shares[p.value] = c;
  j["producer_blocks"] = shares;
  json churn = json::array();
  for (double c : r.churn) churn.push_back(c);
  j["schedule_churn"] = churn;
  json rej;
  for (const auto& [e, c] : r.rejections_by_error) rej[e] = c;
  j["rejections"] = rej;
  j["cpu_ms_total"] = r.cpu_ms_total;
  j["net_words_total"] = r.net_words_total;
  return j;
}

void write_metrics_csv(const MetricsReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, errc::io_error, "cannot create " + dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    require(out.good(), errc::io_error, "cannot write " + dir + "/" + name);
    return out;
  };
  {
    auto f = open("tps.csv");
    f << "window_start_ms,transactions,tps\n";
    for (const auto& w : r.tput.series)
      f << w.window_start << "," << w.transactions << "," << w.tps << "\n";
  }
  {
    auto f = open("finality.csv");
    f << "block,produced_at_ms,irreversible_at_ms,latency_ms\n";
    for (const auto& b : r.fin.blocks)
      f << b.number << "," << b.produced_at << "," << b.irreversible_at << ","
        << (b.irreversible_at >= 0 ? b.irreversible_at - b.produced_at : -1) << "\n";
  }
  {
    auto f = open("drift.csv");
    f << "block,timestamp_ms,produced_at_ms,drift_ms\n";
    for (const auto& b : r.fin.blocks)
      f << b.number << "," << b.timestamp << "," << b.produced_at << "," << b.drift << "\n";
  }
  {
    auto f = open("shares.csv");
    f << "producer,blocks\n";
    for (const auto& [p, c] : r.producer_block_share) f << p.value << "," << c << "\n";
  }
  {
    auto f = open("churn.csv");
    f << "round_transition,jaccard_distance\n";
    for (std::size_t i = 0; i < r.churn.size(); ++i) f << i << "," << r.churn[i] << "\n";
  }
  {
    auto f = open("rejections.csv");
    f << "error,count\n";
    for (const auto& [e, c] : r.rejections_by_error) f << e << "," << c << "\n";
  }
}

}  // namespace eossim
