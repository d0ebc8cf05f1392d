#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace eossim {

using Ms = std::int64_t;      // simulated milliseconds, genesis = 0
using Tokens = std::int64_t;  // base units, 4 implied decimals
using Words = std::int64_t;   // NET words, 1 word = 8 bytes
using Bytes = std::int64_t;
using BlockNum = std::uint64_t;
using Hash64 = std::uint64_t;

constexpr Ms kBlockIntervalMs = 500;
constexpr Ms kMsPerDay = 24LL * 3600 * 1000;
constexpr Ms kUnstakeLockMs = 3 * kMsPerDay;        // 259'200'000
constexpr Ms kProducerEvictionSilenceMs = kMsPerDay; // 86'400'000

enum class errc {
  ok = 0,
  // chain-core
  name_taken,
  invalid_name,
  insufficient_balance,
  insufficient_ram,
  unknown_account,
  unknown_permission,
  recursion_depth_exceeded,
  unsatisfiable_permission,
  expired,
  bad_ref_block,
  auth_failure,
  mutation_in_read_only,
  // resources
  zero_amount,
  insufficient_stake,
  ram_supply_exhausted,
  ram_in_use,
  cpu_exhausted,
  net_exhausted,
  ram_exhausted,
  quota_exceeded,
  // consensus
  too_few_candidates,
  not_your_slot,
  unknown_block,
  not_a_producer,
  // contracts
  overflow_trap,
  depth_exceeded,
  self_transfer,
  non_positive_quantity,
  unknown_handler,
  // netsim
  unknown_node,
  bad_linkage,
  empty_queue,
  // scenarios / cli
  config_error,
  parse_error,
  schema_mismatch,
  io_error,
  replay_divergence,
  // metrics
  empty_trace,
  empty_distribution,
  too_few_rounds,
};

const char* errc_name(errc e);

struct sim_error : std::runtime_error {
  errc code;
  sim_error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw sim_error(c, msg); }

inline void require(bool cond, errc c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

// FNV-1a, 64 bit. Used for transaction/block ids and the chain id. Stable
// across platforms; only injectivity-in-practice is relied on.
struct Fnv1a64 {
  Hash64 state = 0xcbf29ce484222325ULL;
  void put(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ULL;
    }
  }
  void put_u64(std::uint64_t v) {  // little-endian
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put(b, 8);
  }
  void put_str(const std::string& s) {
    put_u64(s.size());
    put(s.data(), s.size());
  }
  Hash64 digest() const { return state; }
};

inline Hash64 fnv1a64(const void* data, std::size_t n) {
  Fnv1a64 h;
  h.put(data, n);
  return h.digest();
}

inline Hash64 fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Deterministic generator (splitmix64). Not std:: distributions: output must
// be identical across platforms for seed-reproducible traces.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed = 0) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [lo, hi] inclusive
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }
  // uniform in [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
};

}  // namespace eossim
