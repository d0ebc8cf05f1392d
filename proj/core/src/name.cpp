#include "eossim/name.hpp"

namespace eossim {

bool AccountName::valid(const std::string& v) {
  if (v.empty() || v.size() > 12) return false;
  for (char c : v) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '1' && c <= '5') || c == '.';
    if (!ok) return false;
  }
  return true;
}

AccountName::AccountName(std::string v) : value(std::move(v)) {
  require(valid(value), errc::invalid_name, "'" + value + "'");
}

}  // namespace eossim
