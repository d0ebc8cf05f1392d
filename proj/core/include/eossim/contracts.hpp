#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eossim/chain.hpp"

namespace eossim {

// ---------------------------------------------------------------------------
// Step IR
//
// Contracts are declarative step lists, not bytecode. Each handler matches a
// (code account, action name) pair and runs its steps in order; any failed
// check aborts the whole enclosing transaction. The textual format is
// documented in docs/contract-format.md.

// Operand: literal integer, literal string/name, or @field reference into the
// action payload.
struct Operand {
  enum class Kind { int_lit, str_lit, field } kind = Kind::int_lit;
  std::int64_t i = 0;
  std::string s;

  static Operand lit(std::int64_t v) { return {Kind::int_lit, v, {}}; }
  static Operand lit(std::string v) { return {Kind::str_lit, 0, std::move(v)}; }
  static Operand field(std::string f) { return {Kind::field, 0, std::move(f)}; }
};

enum class ArithOp { add, sub, mul };
enum class ArithMode { wrapping, checked };

struct ActionTemplate {
  AccountName contract;
  std::string action;
  std::vector<std::pair<std::string, Operand>> args;
};

struct Step;

struct StepCheckAuth { std::string actor_field; };
struct StepCheckCodeIs { AccountName account; };
struct StepCheckRecipientIsSelf {};
// Ends the handler successfully when payload["from"] == receiver. Every
// payout-capable contract needs this to ignore its own outgoing transfer
// notifications.
struct StepSkipIfSenderIsSelf {};
struct StepArith {
  ArithOp op = ArithOp::add;
  ArithMode mode = ArithMode::wrapping;
  std::string out_field;
  Operand a, b;
  std::optional<std::int64_t> bound;  // abort if result > bound
};
struct StepTransferOut { std::string to_field; std::string amount_field; };
struct StepStoreRow {
  std::string table;
  std::string key_field;
  Bytes bytes = 0;
  bool payer_self = true;  // else: first declared actor pays
  std::optional<std::int64_t> quota;  // max rows per author in this table
};
struct StepNotify { Operand account; };  // name literal or @field
struct StepSendInline { ActionTemplate tmpl; };
struct StepSendDeferred {
  ActionTemplate tmpl;
  Ms delay = 0;
  bool sponsor_self = true;  // else: first declared actor sponsors
  int count = 1;             // copies enqueued (recursion factor)
};
enum class BlockInfoKind { mix, number, timestamp, ref };
struct StepReadBlockInfo { std::string into_field; BlockInfoKind what = BlockInfoKind::mix; };
struct StepBranchOn {
  std::string field;
  std::int64_t threshold = 0;  // then-steps run when value < threshold
  std::vector<Step> then_steps;
  std::vector<Step> else_steps;
};

using StepVariant =
    std::variant<StepCheckAuth, StepCheckCodeIs, StepCheckRecipientIsSelf,
                 StepSkipIfSenderIsSelf, StepArith, StepTransferOut, StepStoreRow,
                 StepNotify, StepSendInline, StepSendDeferred, StepReadBlockInfo,
                 StepBranchOn>;

struct Step {
  StepVariant v;
  int index = 0;  // position in parse order, used as finding evidence
};

struct HandlerSpec {
  AccountName code;
  std::string action;
  std::vector<Step> steps;
};

struct ContractDef {
  AccountName owner;
  std::vector<HandlerSpec> handlers;  // at most one per (code, action)
  std::string ricardian;              // optional free text, unvalidated

  const HandlerSpec* find_handler(const AccountName& code, const std::string& action) const;
};

// Textual descriptor format.
ContractDef parse_contract(const std::string& text);          // throws parse_error "line N: ..."
ContractDef parse_contract_file(const std::string& path);
std::string serialize_contract(const ContractDef& c);         // round-trips through parse

// ---------------------------------------------------------------------------
// Static vulnerability checker

enum class VulnClass {
  integer_overflow,
  missing_auth,
  fake_eos,
  fake_notification,
  predictable_randomness,
};
const char* vuln_class_name(VulnClass c);

struct Finding {
  VulnClass vclass;
  AccountName code;
  std::string action;
  std::vector<int> evidence;  // step indices
};

// Deterministic, total analysis; at most one finding per (class, handler).
std::vector<Finding> check_vulnerabilities(const ContractDef& c);

// ---------------------------------------------------------------------------
// Execution

// Per-step resource cost table (ms of CPU / NET words). Fixed so the attack
// scenarios stay quantitative.
struct StepCosts {
  Ms check = 1;
  Ms arith = 1;
  Ms transfer_cpu = 5;
  Words transfer_net = 16;
  Ms store_row_cpu = 2;
  Ms notify = 1;
  Ms send_inline = 2;
  Ms send_deferred = 2;  // billed to the sponsor
  Ms read_block_info = 1;
  Ms branch = 1;
  Ms native_admin = 2;      // stake/unstake/buyram/sellram/grantcode
  Ms native_newaccount = 10;
  Ms native_setcode = 10;
  Ms failed_deferred = 2;   // producer processing cost of an invalid deferred
};

constexpr int kInlineDepthLimit = 16;

struct ExecEvent {  // trace-worthy side effects of one transaction
  std::string kind;          // "transfer", "deferred_scheduled", ...
  Payload detail;
};

struct ExecResult {
  bool ok = false;
  errc error = errc::ok;
  std::string error_msg;
  Ms cpu_ms = 0;       // total billed CPU across payers
  Words net_words = 0;
  std::vector<Transaction> spawned_deferred;
  std::vector<ExecEvent> events;
};

struct ExecEnv {
  BlockNum head_num = 0;   // head at execution time (block being built on)
  Ms head_timestamp = 0;
  Ms now = 0;              // slot time of the enclosing block
  const StepCosts* costs = nullptr;
  // Contract registry for native setcode (name -> definition).
  const std::map<std::string, std::shared_ptr<const ContractDef>>* contract_registry = nullptr;
};

// Executes the whole transaction atomically against `w`: on success the
// changes (including resource billing) are committed, on failure `w` is
// untouched and the result carries the error. Spawned deferred transactions
// are returned, not queued; the caller owns the queue.
ExecResult apply_transaction(World& w, const Transaction& tx, const ExecEnv& env);

// The pseudo-random draw a gambling contract sees: a 0..99 value mixed from
// (head number, head timestamp, ref_block_num of the enclosing tx). Exposed
// so the roll_random attacker can precompute it.
std::int64_t block_info_mix(BlockNum head_num, Ms head_timestamp, BlockNum ref_block_num);

// Native operation used by genesis and by the "setcode" system action.
void set_code(World& w, const AccountName& account, std::shared_ptr<const ContractDef> code);

}  // namespace eossim
