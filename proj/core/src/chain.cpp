#include "eossim/chain.hpp"

#include <algorithm>

namespace eossim {

// ---------------------------------------------------------------------------
// Permissions

static bool same_authority(const Authority& a, const Authority& b) { return a == b; }

Permission Permission::make(std::string name, std::uint32_t threshold,
                            std::vector<WeightedAuthority> auths) {
  require(threshold >= 1, errc::unsatisfiable_permission, "threshold 0 on " + name);
  require(!auths.empty(), errc::unsatisfiable_permission, "empty authorization list on " + name);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < auths.size(); ++i) {
    require(auths[i].weight >= 1, errc::unsatisfiable_permission, "zero weight on " + name);
    for (std::size_t j = 0; j < i; ++j)
      require(!same_authority(auths[i].authority, auths[j].authority),
              errc::unsatisfiable_permission, "duplicate authority on " + name);
    total += auths[i].weight;
  }
  require(total >= threshold, errc::unsatisfiable_permission,
          name + ": weights sum " + std::to_string(total) + " < threshold " +
              std::to_string(threshold));
  Permission p;
  p.name = std::move(name);
  p.threshold = threshold;
  p.authorizations = std::move(auths);
  return p;
}

Permission Permission::single_key(std::string name, const KeyId& key) {
  return make(std::move(name), 1, {{key, 1}});
}

static bool satisfy_impl(const World& w, const AccountName& account,
                         const std::string& permission, const std::set<KeyId>& signers,
                         const std::set<std::pair<AccountName, std::string>>& provided,
                         int depth) {
  require(depth <= kPermissionRecursionLimit, errc::recursion_depth_exceeded,
          account.value + "@" + permission);
  auto it = w.accounts.find(account);
  require(it != w.accounts.end(), errc::unknown_account, account.value);
  const Permission* p = it->second.find_permission(permission);
  require(p != nullptr, errc::unknown_permission, account.value + "@" + permission);

  std::uint64_t weight = 0;
  for (const auto& wa : p->authorizations) {
    if (const auto* key = std::get_if<KeyId>(&wa.authority)) {
      if (signers.count(*key)) weight += wa.weight;
    } else {
      const auto& ref = std::get<std::pair<AccountName, std::string>>(wa.authority);
      if (provided.count(ref)) {
        weight += wa.weight;
      } else if (w.has_account(ref.first) &&
                 w.accounts.at(ref.first).find_permission(ref.second) != nullptr) {
        if (satisfy_impl(w, ref.first, ref.second, signers, provided, depth + 1))
          weight += wa.weight;
      }
      // unresolvable references contribute nothing
    }
    if (weight >= p->threshold) return true;
  }
  return false;
}

bool satisfy_permission(const World& w, const AccountName& account, const std::string& permission,
                        const std::set<KeyId>& signers,
                        const std::set<std::pair<AccountName, std::string>>& provided) {
  return satisfy_impl(w, account, permission, signers, provided, 1);
}

// ---------------------------------------------------------------------------
// Payload helpers

std::int64_t as_int(const Value& v) {
  require(std::holds_alternative<std::int64_t>(v), errc::parse_error, "expected integer value");
  return std::get<std::int64_t>(v);
}

std::string as_str(const Value& v) {
  require(std::holds_alternative<std::string>(v), errc::parse_error, "expected string value");
  return std::get<std::string>(v);
}

// ---------------------------------------------------------------------------
// Canonical serialization
//
// Layout (all integers little-endian 64-bit unless noted; strings as u64
// length + bytes):
//   u64 action_count
//   per action: contract, name, u64 payload_count, per entry sorted by key:
//     key, tag u8 (0 int / 1 string), value; u64 auth_count, per auth:
//     actor, permission
//   u64 ref_block_num
//   u64 expiration
//   u8 kind (0 immediate / 1 deferred); if deferred: u64 delay, sponsor
//   u8 has_origin_code; if set: origin account
// Signers are excluded (authentication metadata, like signatures).

namespace {
struct ByteSink {
  std::vector<std::uint8_t> out;
  void u8(std::uint8_t v) { out.push_back(v); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    u64(s.size());
    out.insert(out.end(), s.begin(), s.end());
  }
};
}  // namespace

std::vector<std::uint8_t> serialize_canonical(const Transaction& tx) {
  ByteSink b;
  b.u64(tx.actions.size());
  for (const auto& a : tx.actions) {
    b.str(a.contract.value);
    b.str(a.name);
    b.u64(a.payload.size());
    for (const auto& [k, v] : a.payload) {  // std::map: already key-sorted
      b.str(k);
      if (const auto* i = std::get_if<std::int64_t>(&v)) {
        b.u8(0);
        b.u64(static_cast<std::uint64_t>(*i));
      } else {
        b.u8(1);
        b.str(std::get<std::string>(v));
      }
    }
    b.u64(a.authorizations.size());
    for (const auto& auth : a.authorizations) {
      b.str(auth.actor.value);
      b.str(auth.permission);
    }
  }
  b.u64(tx.ref_block_num);
  b.u64(static_cast<std::uint64_t>(tx.expiration));
  if (tx.deferred) {
    b.u8(1);
    b.u64(static_cast<std::uint64_t>(tx.deferred->delay));
    b.str(tx.deferred->sponsor.value);
  } else {
    b.u8(0);
  }
  b.u8(tx.origin_code ? 1 : 0);
  if (tx.origin_code) b.str(tx.origin_code->value);
  return b.out;
}

Hash64 transaction_id(const Transaction& tx) {
  auto bytes = serialize_canonical(tx);
  return fnv1a64(bytes.data(), bytes.size());
}

Hash64 block_id(const Block& b) {
  Fnv1a64 h;
  h.put_u64(b.number);
  h.put_u64(static_cast<std::uint64_t>(b.timestamp));
  h.put_str(b.producer.value);
  h.put_u64(b.previous_id);
  h.put_u64(b.transactions.size());
  for (const auto& tx : b.transactions) h.put_u64(transaction_id(tx));
  for (Hash64 f : b.failed_deferred) h.put_u64(f);
  return h.digest();
}

// ---------------------------------------------------------------------------
// DeferredQueue

void DeferredQueue::push(Ms due, const Transaction& tx) {
  Hash64 id = transaction_id(tx);
  if (due_by_id.count(id)) return;  // idempotent
  q.emplace(std::make_pair(due, id), tx);
  due_by_id[id] = due;
}

bool DeferredQueue::erase_id(Hash64 id) {
  auto it = due_by_id.find(id);
  if (it == due_by_id.end()) return false;
  q.erase({it->second, id});
  due_by_id.erase(it);
  return true;
}

std::optional<std::pair<Ms, Transaction>> DeferredQueue::peek_due(Ms now) const {
  if (q.empty()) return std::nullopt;
  const auto& [key, tx] = *q.begin();
  if (key.first > now) return std::nullopt;
  return std::make_pair(key.first, tx);
}

void DeferredQueue::pop_front() {
  require(!q.empty(), errc::empty_queue, "deferred queue");
  due_by_id.erase(q.begin()->first.second);
  q.erase(q.begin());
}

// ---------------------------------------------------------------------------
// World

Account& World::account(const AccountName& n) {
  auto it = accounts.find(n);
  require(it != accounts.end(), errc::unknown_account, n.value);
  return it->second;
}

const Account& World::account(const AccountName& n) const {
  auto it = accounts.find(n);
  require(it != accounts.end(), errc::unknown_account, n.value);
  return it->second;
}

Hash64 world_hash(const World& w) {
  Fnv1a64 h;
  for (const auto& [name, a] : w.accounts) {
    h.put_str(name.value);
    h.put_u64(a.permissions.size());
    for (const auto& [pn, p] : a.permissions) {
      h.put_str(pn);
      h.put_u64(p.threshold);
      h.put_u64(p.authorizations.size());
    }
    for (const auto& [sym, bal] : a.balances) {
      h.put_str(sym);
      h.put_u64(static_cast<std::uint64_t>(bal));
    }
    h.put_u64(a.code ? 1 : 0);
    for (const auto& [tname, rows] : a.tables) {
      h.put_str(tname);
      for (const auto& [key, row] : rows) {
        h.put_str(key);
        h.put_u64(static_cast<std::uint64_t>(row.bytes));
        h.put_str(row.payer.value);
      }
    }
  }
  for (const auto& [name, r] : w.resources.accounts) {
    h.put_str(name.value);
    h.put_u64(static_cast<std::uint64_t>(r.staked_cpu));
    h.put_u64(static_cast<std::uint64_t>(r.staked_net));
    h.put_u64(static_cast<std::uint64_t>(r.cpu_used));
    h.put_u64(static_cast<std::uint64_t>(r.net_used));
    h.put_u64(static_cast<std::uint64_t>(r.ram_owned));
    h.put_u64(static_cast<std::uint64_t>(r.ram_used));
  }
  h.put_u64(static_cast<std::uint64_t>(w.resources.ram_sold));
  h.put_u64(static_cast<std::uint64_t>(w.resources.fees_burned));
  h.put_u64(w.resources.pending_refunds.size());
  for (const auto& pr : w.resources.pending_refunds) {
    h.put_str(pr.account.value);
    h.put_u64(static_cast<std::uint64_t>(pr.amount));
    h.put_u64(static_cast<std::uint64_t>(pr.release_at));
  }
  return h.digest();
}

// ---------------------------------------------------------------------------
// create_account

void create_account(World& w, const AccountName& creator, const AccountName& name,
                    Permission owner, Permission active, Tokens ram_purchase, Ms now) {
  require(w.has_account(creator), errc::unknown_account, creator.value);
  require(!w.has_account(name), errc::name_taken, name.value);
  auto& c = w.account(creator);
  require(c.balance(kCoreSymbol) >= ram_purchase, errc::insufficient_balance,
          creator.value + " balance " + std::to_string(c.balance(kCoreSymbol)));

  // The purchase must yield at least the fixed footprint, checked before any
  // state changes so failures leave the world untouched.
  Tokens fee = ram_purchase * 5 / 1000;
  Bytes would_get = ram_purchase > 0 ? (ram_purchase - fee) / w.resources.params.ram_price : 0;
  require(would_get >= kAccountRamFootprint, errc::insufficient_ram,
          name.value + ": " + std::to_string(would_get) + " < " +
              std::to_string(kAccountRamFootprint));
  w.resources.buy_ram(name, ram_purchase);
  c.balances[kCoreSymbol] -= ram_purchase;

  Account a;
  a.name = name;
  a.creator = creator;
  a.created_at = now;
  owner.name = "owner";
  active.name = "active";
  a.permissions.emplace("owner", std::move(owner));
  a.permissions.emplace("active", std::move(active));
  w.accounts.emplace(name, std::move(a));
  w.resources.use_ram(name, kAccountRamFootprint);
}

}  // namespace eossim
