#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "eossim/common.hpp"
#include "eossim/name.hpp"
#include "eossim/resources.hpp"

namespace eossim {

struct ContractDef;  // contracts.hpp

// ---------------------------------------------------------------------------
// Permissions

struct KeyId {
  std::string value;
  auto operator<=>(const KeyId&) const = default;
};

// Authority is either a key or a nested (account, permission) reference.
using Authority = std::variant<KeyId, std::pair<AccountName, std::string>>;

struct WeightedAuthority {
  Authority authority;
  std::uint32_t weight = 1;
};

struct Permission {
  std::string name;  // "owner", "active" or custom
  std::uint32_t threshold = 1;
  std::vector<WeightedAuthority> authorizations;

  // Validates: threshold >= 1, nonempty authorization list, no duplicate
  // authorities, sum of weights >= threshold.
  static Permission make(std::string name, std::uint32_t threshold,
                         std::vector<WeightedAuthority> auths);

  // Convenience: single-key permission, weight 1, threshold 1.
  static Permission single_key(std::string name, const KeyId& key);
};

constexpr int kPermissionRecursionLimit = 4;

// ---------------------------------------------------------------------------
// Accounts

struct TableRow {
  Bytes bytes = 0;
  AccountName payer;
  AccountName author;  // the actor that caused the store (quota accounting)
};

struct Account {
  AccountName name;
  AccountName creator;
  Ms created_at = 0;
  std::map<std::string, Permission> permissions;  // always owner + active
  std::map<std::string, Tokens> balances;         // symbol -> base units
  std::shared_ptr<const ContractDef> code;        // immutable once deployed
  std::map<std::string, std::map<std::string, TableRow>> tables;

  const Permission* find_permission(const std::string& n) const {
    auto it = permissions.find(n);
    return it == permissions.end() ? nullptr : &it->second;
  }
  Tokens balance(const std::string& symbol) const {
    auto it = balances.find(symbol);
    return it == balances.end() ? 0 : it->second;
  }
};

// ---------------------------------------------------------------------------
// Actions and transactions

using Value = std::variant<std::int64_t, std::string>;
using Payload = std::map<std::string, Value>;

std::int64_t as_int(const Value& v);
std::string as_str(const Value& v);

struct ActionAuth {
  AccountName actor;
  std::string permission = "active";
};

struct Action {
  AccountName contract;  // the code account
  std::string name;
  Payload payload;
  std::vector<ActionAuth> authorizations;
};

struct Deferred {
  Ms delay = 0;
  AccountName sponsor;
};
// immediate is the default kind
using TxKind = std::optional<Deferred>;

struct Transaction {
  std::vector<Action> actions;  // nonempty
  BlockNum ref_block_num = 0;
  Ms expiration = 0;
  TxKind deferred;  // nullopt = immediate

  // Authentication metadata, not part of the canonical serialization:
  std::set<KeyId> signers;
  // Set when the transaction was generated by contract code (send_deferred);
  // that code account's authority is treated as provided at execution time.
  std::optional<AccountName> origin_code;

  bool is_deferred() const { return deferred.has_value(); }
};

// Canonical serialization (documented byte layout, little-endian integers,
// see docs/trace-format.md). Signers are excluded, like signatures in a real
// chain. The 64-bit FNV-1a of these bytes is the transaction id.
std::vector<std::uint8_t> serialize_canonical(const Transaction& tx);
Hash64 transaction_id(const Transaction& tx);

// ---------------------------------------------------------------------------
// Blocks

struct Block {
  BlockNum number = 0;       // contiguous height
  Ms timestamp = 0;          // slot-aligned: slot * 500 ms
  AccountName producer;
  Hash64 previous_id = 0;
  std::vector<Transaction> transactions;
  std::vector<Hash64> failed_deferred;  // due deferred ids filtered as invalid
  std::set<AccountName> confirmations;  // producer self-confirmation implicit
  Ms cpu_used = 0;
  Words net_used = 0;
  bool exhausted = false;  // budget saturated with work remaining

  std::uint64_t slot() const { return static_cast<std::uint64_t>(timestamp / kBlockIntervalMs); }
};

Hash64 block_id(const Block& b);

// ---------------------------------------------------------------------------
// World and chain state

// Deferred transactions ordered by (due_time, id).
struct DeferredQueue {
  std::map<std::pair<Ms, Hash64>, Transaction> q;
  std::map<Hash64, Ms> due_by_id;

  void push(Ms due, const Transaction& tx);
  bool erase_id(Hash64 id);
  bool contains(Hash64 id) const { return due_by_id.count(id) > 0; }
  // earliest entry with due <= now, or nullopt
  std::optional<std::pair<Ms, Transaction>> peek_due(Ms now) const;
  void pop_front();
  std::size_t size() const { return q.size(); }
  bool empty() const { return q.empty(); }
};

// The replicated, transactional part of node state. Copied per transaction
// for atomic commit/rollback; kept deliberately small (no blocks, no queue).
struct World {
  std::map<AccountName, Account> accounts;
  ResourceLedger resources;

  Account& account(const AccountName& n);
  const Account& account(const AccountName& n) const;
  bool has_account(const AccountName& n) const { return accounts.count(n) > 0; }
};

enum class ReadMode { speculative, head, read_only, irreversible };

struct ChainState {
  Hash64 chain_id = 0;
  std::vector<Block> blocks;  // blocks[i].number == i + 1
  BlockNum head = 0;
  BlockNum last_irreversible = 0;
  World world;          // state as of head
  World lib_world;      // state as of last_irreversible
  DeferredQueue deferred_queue;
  ReadMode read_mode = ReadMode::head;

  Hash64 head_id() const { return blocks.empty() ? chain_id : block_id(blocks.back()); }
  Ms head_timestamp() const { return blocks.empty() ? 0 : blocks.back().timestamp; }
  const Block* find_block(BlockNum n) const {
    return (n >= 1 && n <= blocks.size()) ? &blocks[n - 1] : nullptr;
  }
};

// Deterministic state digest over accounts, balances, resources and tables.
// Used by atomicity / replay tests.
Hash64 world_hash(const World& w);

// ---------------------------------------------------------------------------
// Operations

// True iff the permission's threshold is met by `signers` plus `provided`
// (account, permission) authorities, resolving nested account authorities
// recursively up to kPermissionRecursionLimit.
bool satisfy_permission(const World& w, const AccountName& account,
                        const std::string& permission, const std::set<KeyId>& signers,
                        const std::set<std::pair<AccountName, std::string>>& provided = {});

constexpr Bytes kAccountRamFootprint = 3000;
constexpr const char* kCoreSymbol = "EOS";

// Creates the account, buys RAM for `ram_purchase` tokens out of the
// creator's balance and charges the fixed footprint.
void create_account(World& w, const AccountName& creator, const AccountName& name,
                    Permission owner, Permission active, Tokens ram_purchase, Ms now);

// Read-mode balance query. `pending` supplies speculative-mode overlay
// transactions (the local pool); may be null.
Tokens query_balance(const ChainState& s, ReadMode mode, const AccountName& account,
                     const std::string& symbol,
                     const std::vector<Transaction>* pending = nullptr);

}  // namespace eossim
