#pragma once

#include <map>
#include <vector>

#include "eossim/common.hpp"
#include "eossim/name.hpp"

namespace eossim {

// Token-staked CPU/NET metering with windowed replenishment, RAM ownership
// with a 0.5% trade fee, and the 3-day unstake lock.
//
// Replenishment model: usage counters reset at fixed window boundaries
// (window index = now / window_length). RAM never replenishes.

enum class ResKind { cpu, net };

struct AccountResources {
  Tokens staked_cpu = 0;
  Tokens staked_net = 0;
  Ms cpu_used = 0;       // within current window
  Words net_used = 0;    // within current window
  std::int64_t window = 0;  // window index the usage counters belong to
  Bytes ram_owned = 0;
  Bytes ram_used = 0;
};

struct PendingRefund {
  AccountName account;
  Tokens amount = 0;
  Ms release_at = 0;
};

struct ResourceParams {
  Tokens ram_price = 1;              // base units per byte
  Bytes total_ram_supply = 1'000'000'000;
  Ms window_cpu_capacity = 10'000;   // ms of CPU per window, shared pro rata
  Words window_net_capacity = 1'000'000;
  Ms window_length = kMsPerDay;

  bool operator==(const ResourceParams&) const = default;
};

struct ResourceLedger {
  ResourceParams params;
  std::map<AccountName, AccountResources> accounts;
  Tokens total_staked_cpu = 0;
  Tokens total_staked_net = 0;
  Bytes ram_sold = 0;
  Tokens fees_burned = 0;  // cumulative RAM trade fees
  std::vector<PendingRefund> pending_refunds;  // in schedule order

  AccountResources& acct(const AccountName& a) { return accounts[a]; }
  const AccountResources* find(const AccountName& a) const {
    auto it = accounts.find(a);
    return it == accounts.end() ? nullptr : &it->second;
  }

  Ms cpu_limit(const AccountName& a) const;
  Words net_limit(const AccountName& a) const;

  // Moves `amount` from liquid balance (checked by the caller against the
  // token ledger) into stake. Limits are recomputed implicitly: they are a
  // pure function of stakes.
  void stake(const AccountName& a, Tokens amount, ResKind kind);

  // Stake shrinks immediately; tokens come back via a pending refund after
  // the 3-day lock. mature_refunds() credits what is due.
  void unstake(const AccountName& a, Tokens amount, ResKind kind, Ms now);

  // Returns refunds whose release time has passed; caller credits balances.
  std::vector<PendingRefund> mature_refunds(Ms now);

  // Returns bytes acquired. fee = floor(payment * 0.5%), burned.
  Bytes buy_ram(const AccountName& a, Tokens payment);

  // Returns net proceeds after the 0.5% fee. Immediate, no lock.
  Tokens sell_ram(const AccountName& a, Bytes bytes);

  // Applies window replenishment at `now`, then charges usage or throws
  // cpu_exhausted / net_exhausted.
  void consume(const AccountName& a, Ms cpu_ms, Words net_words, Ms now);

  // Pre-check without mutating: would consume() succeed?
  bool can_consume(const AccountName& a, Ms cpu_ms, Words net_words, Ms now) const;

  void use_ram(const AccountName& a, Bytes bytes);
  void release_ram(const AccountName& a, Bytes bytes);

 private:
  void replenish(AccountResources& r, Ms now) const;
};

}  // namespace eossim
