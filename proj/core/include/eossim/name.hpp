#pragma once

#include <compare>
#include <string>

#include "eossim/common.hpp"

namespace eossim {

// Account identifier: 1..12 chars from {a..z, 1..5, .}. The dot is admitted
// for system accounts like "eosio.token". Ordering is plain lexicographic and
// is used as the deterministic tie-breaker throughout.
struct AccountName {
  std::string value;

  AccountName() = default;
  explicit AccountName(std::string v);

  static bool valid(const std::string& v);

  auto operator<=>(const AccountName&) const = default;
};

inline AccountName operator""_n(const char* s, std::size_t n) {
  return AccountName(std::string(s, n));
}

}  // namespace eossim
