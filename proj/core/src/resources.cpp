#include "eossim/resources.hpp"

#include <algorithm>

namespace eossim {

namespace {
// floor(payment * 0.5%)
Tokens ram_fee(Tokens gross) { return gross * 5 / 1000; }
}  // namespace

Ms ResourceLedger::cpu_limit(const AccountName& a) const {
  const auto* r = find(a);
  if (!r || total_staked_cpu == 0) return 0;
  // integer floor of capacity * share
  return static_cast<Ms>(static_cast<__int128>(params.window_cpu_capacity) * r->staked_cpu /
                         total_staked_cpu);
}

Words ResourceLedger::net_limit(const AccountName& a) const {
  const auto* r = find(a);
  if (!r || total_staked_net == 0) return 0;
  return static_cast<Words>(static_cast<__int128>(params.window_net_capacity) * r->staked_net /
                            total_staked_net);
}

void ResourceLedger::stake(const AccountName& a, Tokens amount, ResKind kind) {
  require(amount > 0, errc::zero_amount, "stake " + a.value);
  auto& r = acct(a);
  if (kind == ResKind::cpu) {
    r.staked_cpu += amount;
    total_staked_cpu += amount;
  } else {
    r.staked_net += amount;
    total_staked_net += amount;
  }
}

void ResourceLedger::unstake(const AccountName& a, Tokens amount, ResKind kind, Ms now) {
  require(amount > 0, errc::zero_amount, "unstake " + a.value);
  auto& r = acct(a);
  Tokens& staked = (kind == ResKind::cpu) ? r.staked_cpu : r.staked_net;
  require(staked >= amount, errc::insufficient_stake,
          a.value + " staked " + std::to_string(staked));
  staked -= amount;
  (kind == ResKind::cpu ? total_staked_cpu : total_staked_net) -= amount;
  pending_refunds.push_back({a, amount, now + kUnstakeLockMs});
}

std::vector<PendingRefund> ResourceLedger::mature_refunds(Ms now) {
  std::vector<PendingRefund> due;
  auto it = pending_refunds.begin();
  while (it != pending_refunds.end()) {
    if (it->release_at <= now) {
      due.push_back(*it);
      it = pending_refunds.erase(it);
    } else {
      ++it;
    }
  }
  return due;
}

Bytes ResourceLedger::buy_ram(const AccountName& a, Tokens payment) {
  require(payment > 0, errc::zero_amount, "buy_ram " + a.value);
  Tokens fee = ram_fee(payment);
  Bytes bytes = (payment - fee) / params.ram_price;
  require(ram_sold + bytes <= params.total_ram_supply, errc::ram_supply_exhausted,
          "supply " + std::to_string(params.total_ram_supply));
  fees_burned += fee;
  ram_sold += bytes;
  acct(a).ram_owned += bytes;
  return bytes;
}

Tokens ResourceLedger::sell_ram(const AccountName& a, Bytes bytes) {
  if (bytes == 0) return 0;
  auto& r = acct(a);
  require(r.ram_owned - r.ram_used >= bytes, errc::ram_in_use,
          a.value + " free " + std::to_string(r.ram_owned - r.ram_used));
  Tokens proceeds = bytes * params.ram_price;
  Tokens fee = ram_fee(proceeds);
  r.ram_owned -= bytes;
  ram_sold -= bytes;
  fees_burned += fee;
  return proceeds - fee;
}

void ResourceLedger::replenish(AccountResources& r, Ms now) const {
  std::int64_t w = now / params.window_length;
  if (w != r.window) {
    r.window = w;
    r.cpu_used = 0;
    r.net_used = 0;
  }
}

void ResourceLedger::consume(const AccountName& a, Ms cpu_ms, Words net_words, Ms now) {
  auto& r = acct(a);
  replenish(r, now);
  require(r.cpu_used + cpu_ms <= cpu_limit(a), errc::cpu_exhausted,
          a.value + " used " + std::to_string(r.cpu_used) + "+" + std::to_string(cpu_ms) +
              " limit " + std::to_string(cpu_limit(a)));
  require(r.net_used + net_words <= net_limit(a), errc::net_exhausted,
          a.value + " used " + std::to_string(r.net_used) + "+" + std::to_string(net_words) +
              " limit " + std::to_string(net_limit(a)));
  r.cpu_used += cpu_ms;
  r.net_used += net_words;
}

bool ResourceLedger::can_consume(const AccountName& a, Ms cpu_ms, Words net_words, Ms now) const {
  const auto* r = find(a);
  Ms cpu_used = 0;
  Words net_used = 0;
  if (r) {
    std::int64_t w = now / params.window_length;
    if (w == r->window) {
      cpu_used = r->cpu_used;
      net_used = r->net_used;
    }
  }
  return cpu_used + cpu_ms <= cpu_limit(a) && net_used + net_words <= net_limit(a);
}

void ResourceLedger::use_ram(const AccountName& a, Bytes bytes) {
  auto& r = acct(a);
  require(r.ram_owned - r.ram_used >= bytes, errc::ram_exhausted,
          a.value + " free " + std::to_string(r.ram_owned - r.ram_used) + " need " +
              std::to_string(bytes));
  r.ram_used += bytes;
}

void ResourceLedger::release_ram(const AccountName& a, Bytes bytes) {
  auto& r = acct(a);
  require(r.ram_used >= bytes, errc::ram_exhausted, "release beyond use " + a.value);
  r.ram_used -= bytes;
}

}  // namespace eossim
