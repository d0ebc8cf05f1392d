#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "eossim/common.hpp"

namespace eossim {

using json = nlohmann::ordered_json;

// Trace: JSON-lines event log, the replayable ground truth for metrics and
// regression. First line is a header object; every following line is one
// event. Field order is fixed at construction so serialization is
// byte-deterministic. Integers only — no floats ever enter a trace.
//
// Header: {"schema":1,"scenario":<name>,"seed":<u64>,"scenario_text":<str>}
// Event:  {"t":<ms>,"kind":<str>, ...kind-specific fields}

constexpr int kTraceSchemaVersion = 1;

struct TraceEvent {
  Ms t = 0;
  std::string kind;
  json fields;  // kind-specific payload (ordered)
};

struct Trace {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string scenario_text;  // embedded so `replay` is self-contained
  std::vector<TraceEvent> events;

  void emit(Ms t, std::string kind, json fields) {
    events.push_back({t, std::move(kind), std::move(fields)});
  }

  std::string to_jsonl() const;
  static Trace from_jsonl(const std::string& text);  // throws schema_mismatch / parse_error

  void save(const std::string& path) const;
  static Trace load(const std::string& path);
};

}  // namespace eossim
