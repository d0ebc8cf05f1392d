#include "eossim/trace.hpp"

#include <fstream>
#include <sstream>

namespace eossim {

std::string Trace::to_jsonl() const {
  std::ostringstream os;
  json header;
  header["schema"] = kTraceSchemaVersion;
  header["scenario"] = scenario;
  header["seed"] = seed;
  header["scenario_text"] = scenario_text;
  os << header.dump() << "\n";
  for (const auto& e : events) {
    json line;
    line["t"] = e.t;
    line["kind"] = e.kind;
    for (const auto& [k, v] : e.fields.items()) line[k] = v;
    os << line.dump() << "\n";
  }
  return os.str();
}

Trace Trace::from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Trace tr;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(errc::parse_error, "trace line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      require(j.contains("schema"), errc::schema_mismatch, "missing schema field");
      require(j["schema"].get<int>() == kTraceSchemaVersion, errc::schema_mismatch,
              "schema " + j["schema"].dump() + ", expected " +
                  std::to_string(kTraceSchemaVersion));
      tr.scenario = j.value("scenario", "");
      tr.seed = j.value("seed", std::uint64_t{0});
      tr.scenario_text = j.value("scenario_text", "");
      have_header = true;
      continue;
    }
    TraceEvent e;
    e.t = j.at("t").get<Ms>();
    e.kind = j.at("kind").get<std::string>();
    for (const auto& [k, v] : j.items())
      if (k != "t" && k != "kind") e.fields[k] = v;
    tr.events.push_back(std::move(e));
  }
  require(have_header, errc::parse_error, "empty trace");
  return tr;
}

void Trace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io_error, "cannot write " + path);
  out << to_jsonl();
  require(out.good(), errc::io_error, "write failed: " + path);
}

Trace Trace::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

}  // namespace eossim
