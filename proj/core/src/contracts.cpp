#include "eossim/contracts.hpp"

#include <fstream>
#include <sstream>

namespace eossim {

const HandlerSpec* ContractDef::find_handler(const AccountName& code,
                                             const std::string& action) const {
  for (const auto& h : handlers)
    if (h.code == code && h.action == action) return &h;
  // "any.code" is the wildcard handler: it matches the action from any code
  // account, which is exactly the hole the fake-transfer vulnerabilities need.
  for (const auto& h : handlers)
    if (h.code.value == "any.code" && h.action == action) return &h;
  return nullptr;
}

const char* vuln_class_name(VulnClass c) {
  switch (c) {
    case VulnClass::integer_overflow: return "integer-overflow";
    case VulnClass::missing_auth: return "missing-auth";
    case VulnClass::fake_eos: return "fake-eos";
    case VulnClass::fake_notification: return "fake-notification";
    case VulnClass::predictable_randomness: return "predictable-randomness";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Descriptor format

namespace {

[[noreturn]] void perr(int line, const std::string& msg) {
  fail(errc::parse_error, "line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct KvArgs {
  std::map<std::string, std::string> kv;
  int line;
  std::string get(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) perr(line, "missing argument '" + k + "'");
    return it->second;
  }
  std::optional<std::string> opt(const std::string& k) const {
    auto it = kv.find(k);
    return it == kv.end() ? std::nullopt : std::make_optional(it->second);
  }
};

KvArgs parse_kv(const std::vector<std::string>& toks, std::size_t from, int line) {
  KvArgs a;
  a.line = line;
  for (std::size_t i = from; i < toks.size(); ++i) {
    auto eq = toks[i].find('=');
    if (eq == std::string::npos) perr(line, "expected key=value, got '" + toks[i] + "'");
    a.kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return a;
}

std::int64_t parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    perr(line, "not an integer: '" + s + "'");
  }
}

bool is_int(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

Operand parse_operand(const std::string& s, int line) {
  if (!s.empty() && s[0] == '@') return Operand::field(s.substr(1));
  if (is_int(s)) return Operand::lit(parse_int(s, line));
  return Operand::lit(s);
}

std::string operand_text(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::field: return "@" + o.s;
    case Operand::Kind::int_lit: return std::to_string(o.i);
    case Operand::Kind::str_lit: return o.s;
  }
  return "";
}

std::vector<std::pair<std::string, Operand>> parse_args_list(const std::string& s, int line) {
  std::vector<std::pair<std::string, Operand>> out;
  if (s.empty()) return out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) perr(line, "args entry needs key:value, got '" + item + "'");
    out.emplace_back(item.substr(0, colon), parse_operand(item.substr(colon + 1), line));
  }
  return out;
}

ActionTemplate parse_template(const KvArgs& a) {
  ActionTemplate t;
  t.contract = AccountName(a.get("code"));
  t.action = a.get("action");
  if (auto args = a.opt("args")) t.args = parse_args_list(*args, a.line);
  if (auto auth = a.opt("auth")) t.args.emplace_back("auth_", parse_operand(*auth, a.line));
  return t;
}

struct Parser {
  std::vector<std::pair<int, std::vector<std::string>>> lines;  // (lineno, tokens)
  std::size_t pos = 0;
  int next_index = 0;

  bool done() const { return pos >= lines.size(); }
  const std::vector<std::string>& peek() const { return lines[pos].second; }
  int lineno() const { return done() ? (lines.empty() ? 0 : lines.back().first) : lines[pos].first; }

  Step parse_step() {
    auto [ln, toks] = lines[pos];
    ++pos;
    const std::string& op = toks[0];
    KvArgs a = parse_kv(toks, 1, ln);
    Step step;
    step.index = next_index++;
    if (op == "check_auth") {
      step.v = StepCheckAuth{a.get("actor")};
    } else if (op == "check_code_is") {
      step.v = StepCheckCodeIs{AccountName(a.get("account"))};
    } else if (op == "check_recipient_is_self") {
      step.v = StepCheckRecipientIsSelf{};
    } else if (op == "skip_if_sender_is_self") {
      step.v = StepSkipIfSenderIsSelf{};
    } else if (op == "arith") {
      StepArith s;
      std::string o = a.get("op");
      if (o == "add") s.op = ArithOp::add;
      else if (o == "sub") s.op = ArithOp::sub;
      else if (o == "mul") s.op = ArithOp::mul;
      else perr(ln, "unknown arith op '" + o + "'");
      std::string m = a.get("mode");
      if (m == "wrapping") s.mode = ArithMode::wrapping;
      else if (m == "checked") s.mode = ArithMode::checked;
      else perr(ln, "unknown arith mode '" + m + "'");
      s.out_field = a.get("out");
      s.a = parse_operand(a.get("a"), ln);
      s.b = parse_operand(a.get("b"), ln);
      if (auto b = a.opt("bound")) s.bound = parse_int(*b, ln);
      step.v = s;
    } else if (op == "transfer_out") {
      step.v = StepTransferOut{a.get("to"), a.get("amount")};
    } else if (op == "store_row") {
      StepStoreRow s;
      s.table = a.get("table");
      s.key_field = a.get("key");
      s.bytes = parse_int(a.get("bytes"), ln);
      std::string payer = a.opt("payer").value_or("self");
      if (payer == "self") s.payer_self = true;
      else if (payer == "actor") s.payer_self = false;
      else perr(ln, "payer must be self or actor");
      if (auto q = a.opt("quota")) s.quota = parse_int(*q, ln);
      step.v = s;
    } else if (op == "notify") {
      step.v = StepNotify{parse_operand(a.get("account"), ln)};
    } else if (op == "send_inline") {
      step.v = StepSendInline{parse_template(a)};
    } else if (op == "send_deferred") {
      StepSendDeferred s;
      s.tmpl = parse_template(a);
      s.delay = parse_int(a.get("delay"), ln);
      std::string sp = a.opt("sponsor").value_or("self");
      if (sp == "self") s.sponsor_self = true;
      else if (sp == "actor") s.sponsor_self = false;
      else perr(ln, "sponsor must be self or actor");
      s.count = static_cast<int>(parse_int(a.opt("count").value_or("1"), ln));
      step.v = s;
    } else if (op == "read_block_info") {
      StepReadBlockInfo s;
      s.into_field = a.get("into");
      std::string w = a.opt("what").value_or("mix");
      if (w == "mix") s.what = BlockInfoKind::mix;
      else if (w == "number") s.what = BlockInfoKind::number;
      else if (w == "timestamp") s.what = BlockInfoKind::timestamp;
      else if (w == "ref") s.what = BlockInfoKind::ref;
      else perr(ln, "unknown block info kind '" + w + "'");
      step.v = s;
    } else if (op == "branch_on") {
      StepBranchOn s;
      s.field = a.get("field");
      s.threshold = parse_int(a.get("threshold"), ln);
      if (done() || peek()[0] != "then") perr(lineno(), "branch_on needs a 'then' block");
      ++pos;
      s.then_steps = parse_block();
      if (!done() && peek()[0] == "else") {
        ++pos;
        s.else_steps = parse_block();
      }
      if (done() || peek()[0] != "end") perr(lineno(), "branch_on needs 'end'");
      ++pos;
      step.v = s;
    } else {
      perr(ln, "unknown step '" + op + "'");
    }
    return step;
  }

  // steps until a block terminator ('else'/'end') or a section keyword
  std::vector<Step> parse_block() {
    std::vector<Step> steps;
    while (!done()) {
      const std::string& op = peek()[0];
      if (op == "else" || op == "end" || op == "handler" || op == "contract" || op == "ricardian")
        break;
      steps.push_back(parse_step());
    }
    return steps;
  }
};

}  // namespace

ContractDef parse_contract(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = tokenize(raw);
    if (!toks.empty()) p.lines.emplace_back(ln, toks);
  }
  require(!p.lines.empty(), errc::parse_error, "line 1: empty contract descriptor");

  ContractDef c;
  bool have_owner = false;
  while (!p.done()) {
    auto toks = p.peek();
    int line = p.lineno();
    if (toks[0] == "contract") {
      if (toks.size() != 2) perr(line, "contract needs exactly one name");
      c.owner = AccountName(toks[1]);
      have_owner = true;
      ++p.pos;
    } else if (toks[0] == "ricardian") {
      std::string text2;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (i > 1) text2 += ' ';
        text2 += toks[i];
      }
      c.ricardian = text2;
      ++p.pos;
    } else if (toks[0] == "handler") {
      if (toks.size() != 3) perr(line, "handler needs <code> <action>");
      HandlerSpec h;
      h.code = AccountName(toks[1]);
      h.action = toks[2];
      for (const auto& prev : c.handlers)
        if (prev.code == h.code && prev.action == h.action)
          perr(line, "duplicate handler " + h.code.value + "::" + h.action);
      ++p.pos;
      h.steps = p.parse_block();
      c.handlers.push_back(std::move(h));
    } else {
      perr(line, "expected contract/ricardian/handler, got '" + toks[0] + "'");
    }
  }
  if (!have_owner) perr(1, "missing 'contract <owner>' line");
  return c;
}

ContractDef parse_contract_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_error, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_contract(ss.str());
}

namespace {

std::string template_text(const ActionTemplate& t) {
  std::string out = "code=" + t.contract.value + " action=" + t.action;
  std::string args, auth;
  for (const auto& [k, v] : t.args) {
    if (k == "auth_") {
      auth = operand_text(v);
      continue;
    }
    if (!args.empty()) args += ',';
    args += k + ":" + operand_text(v);
  }
  if (!args.empty()) out += " args=" + args;
  if (!auth.empty()) out += " auth=" + auth;
  return out;
}

void serialize_steps(std::ostream& os, const std::vector<Step>& steps, int indent) {
  std::string pad(indent, ' ');
  for (const auto& st : steps) {
    os << pad;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, StepCheckAuth>) {
            os << "check_auth actor=" << s.actor_field;
          } else if constexpr (std::is_same_v<T, StepCheckCodeIs>) {
            os << "check_code_is account=" << s.account.value;
          } else if constexpr (std::is_same_v<T, StepCheckRecipientIsSelf>) {
            os << "check_recipient_is_self";
          } else if constexpr (std::is_same_v<T, StepSkipIfSenderIsSelf>) {
            os << "skip_if_sender_is_self";
          } else if constexpr (std::is_same_v<T, StepArith>) {
            os << "arith op="
               << (s.op == ArithOp::add ? "add" : s.op == ArithOp::sub ? "sub" : "mul")
               << " mode=" << (s.mode == ArithMode::wrapping ? "wrapping" : "checked")
               << " out=" << s.out_field << " a=" << operand_text(s.a)
               << " b=" << operand_text(s.b);
            if (s.bound) os << " bound=" << *s.bound;
          } else if constexpr (std::is_same_v<T, StepTransferOut>) {
            os << "transfer_out to=" << s.to_field << " amount=" << s.amount_field;
          } else if constexpr (std::is_same_v<T, StepStoreRow>) {
            os << "store_row table=" << s.table << " key=" << s.key_field
               << " bytes=" << s.bytes << " payer=" << (s.payer_self ? "self" : "actor");
            if (s.quota) os << " quota=" << *s.quota;
          } else if constexpr (std::is_same_v<T, StepNotify>) {
            os << "notify account=" << operand_text(s.account);
          } else if constexpr (std::is_same_v<T, StepSendInline>) {
            os << "send_inline " << template_text(s.tmpl);
          } else if constexpr (std::is_same_v<T, StepSendDeferred>) {
            os << "send_deferred " << template_text(s.tmpl) << " delay=" << s.delay
               << " sponsor=" << (s.sponsor_self ? "self" : "actor");
            if (s.count != 1) os << " count=" << s.count;
          } else if constexpr (std::is_same_v<T, StepReadBlockInfo>) {
            os << "read_block_info into=" << s.into_field;
            if (s.what != BlockInfoKind::mix)
              os << " what="
                 << (s.what == BlockInfoKind::number ? "number"
                     : s.what == BlockInfoKind::timestamp ? "timestamp" : "ref");
          } else if constexpr (std::is_same_v<T, StepBranchOn>) {
            os << "branch_on field=" << s.field << " threshold=" << s.threshold << "\n";
            os << pad << "then\n";
            serialize_steps(os, s.then_steps, indent + 2);
            if (!s.else_steps.empty()) {
              os << pad << "else\n";
              serialize_steps(os, s.else_steps, indent + 2);
            }
            os << pad << "end";
          }
        },
        st.v);
    os << "\n";
  }
}

}  // namespace

std::string serialize_contract(const ContractDef& c) {
  std::ostringstream os;
  os << "contract " << c.owner.value << "\n";
  if (!c.ricardian.empty()) os << "ricardian " << c.ricardian << "\n";
  for (const auto& h : c.handlers) {
    os << "handler " << h.code.value << " " << h.action << "\n";
    serialize_steps(os, h.steps, 2);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Static checker

namespace {

struct FlatStep {
  const Step* step;
  // pre-order position equals step->index (assigned at parse time); for
  // programmatically built contracts the indices may be zero, so we renumber.
  int pos;
  int branch_of = -1;  // pos of the innermost enclosing branch_on, -1 if none
};

void flatten(const std::vector<Step>& steps, std::vector<FlatStep>& out, int branch_of) {
  for (const auto& s : steps) {
    int my = static_cast<int>(out.size());
    out.push_back({&s, my, branch_of});
    if (const auto* br = std::get_if<StepBranchOn>(&s.v)) {
      flatten(br->then_steps, out, my);
      flatten(br->else_steps, out, my);
    }
  }
}

bool in_branch(const std::vector<FlatStep>& flat, int pos, int branch_pos) {
  int b = flat[pos].branch_of;
  while (b != -1) {
    if (b == branch_pos) return true;
    b = flat[b].branch_of;
  }
  return false;
}

}  // namespace

std::vector<Finding> check_vulnerabilities(const ContractDef& c) {
  std::vector<Finding> findings;
  for (const auto& h : c.handlers) {
    std::vector<FlatStep> flat;
    flatten(h.steps, flat, -1);

    bool has_code_check_token = false;
    bool has_recipient_check = false;
    for (const auto& f : flat) {
      if (const auto* cc = std::get_if<StepCheckCodeIs>(&f.step->v))
        if (cc->account.value == "eosio.token") has_code_check_token = true;
      if (std::holds_alternative<StepCheckRecipientIsSelf>(f.step->v)) has_recipient_check = true;
    }

    auto guarded_before = [&](int pos) {
      for (int i = 0; i < pos; ++i) {
        const auto& v = flat[i].step->v;
        if (std::holds_alternative<StepCheckAuth>(v)) return true;
        // A provenance-validated notification handler is not callable by
        // arbitrary accounts in the harmful sense; treat the code/recipient
        // checks as the auth guard for notification-style handlers.
        if (std::holds_alternative<StepCheckCodeIs>(v)) return true;
        if (std::holds_alternative<StepCheckRecipientIsSelf>(v)) return true;
      }
      return false;
    };

    // taint from wrapping, unbounded arithmetic
    std::map<std::string, int> overflow_taint;  // field -> originating step pos
    // taint from block-info reads
    std::map<std::string, int> random_taint;
    std::vector<int> overflow_evidence, missing_auth_evidence, effectful;
    std::vector<int> random_evidence;

    for (const auto& f : flat) {
      const auto& v = f.step->v;
      if (const auto* a = std::get_if<StepArith>(&v)) {
        bool tainted_in =
            (a->a.kind == Operand::Kind::field && overflow_taint.count(a->a.s)) ||
            (a->b.kind == Operand::Kind::field && overflow_taint.count(a->b.s));
        bool rnd_in = (a->a.kind == Operand::Kind::field && random_taint.count(a->a.s)) ||
                      (a->b.kind == Operand::Kind::field && random_taint.count(a->b.s));
        bool introduces = a->mode == ArithMode::wrapping && !a->bound;
        if (introduces || tainted_in)
          overflow_taint[a->out_field] = f.pos;
        else
          overflow_taint.erase(a->out_field);
        if (rnd_in)
          random_taint[a->out_field] = f.pos;
        else
          random_taint.erase(a->out_field);
      } else if (const auto* r = std::get_if<StepReadBlockInfo>(&v)) {
        random_taint[r->into_field] = f.pos;
      } else if (const auto* t = std::get_if<StepTransferOut>(&v)) {
        effectful.push_back(f.pos);
        if (overflow_taint.count(t->amount_field)) {
          overflow_evidence.push_back(overflow_taint[t->amount_field]);
          overflow_evidence.push_back(f.pos);
        }
        if (!guarded_before(f.pos)) missing_auth_evidence.push_back(f.pos);
      } else if (const auto* s = std::get_if<StepStoreRow>(&v)) {
        effectful.push_back(f.pos);
        if (overflow_taint.count(s->key_field)) {
          overflow_evidence.push_back(overflow_taint[s->key_field]);
          overflow_evidence.push_back(f.pos);
        }
        if (!s->payer_self && !guarded_before(f.pos)) missing_auth_evidence.push_back(f.pos);
      } else if (const auto* b = std::get_if<StepBranchOn>(&v)) {
        if (random_taint.count(b->field)) {
          // does either arm contain a transfer_out?
          for (const auto& g : flat) {
            if (g.pos > f.pos && in_branch(flat, g.pos, f.pos) &&
                std::holds_alternative<StepTransferOut>(g.step->v)) {
              random_evidence.push_back(random_taint[b->field]);
              random_evidence.push_back(f.pos);
              random_evidence.push_back(g.pos);
              break;
            }
          }
        }
      }
    }

    auto add = [&](VulnClass cls, std::vector<int> ev) {
      findings.push_back({cls, h.code, h.action, std::move(ev)});
    };
    if (!overflow_evidence.empty()) add(VulnClass::integer_overflow, overflow_evidence);
    if (!missing_auth_evidence.empty()) add(VulnClass::missing_auth, missing_auth_evidence);
    if (h.action == "transfer" && !effectful.empty()) {
      if (!has_code_check_token) add(VulnClass::fake_eos, effectful);
      if (!has_recipient_check) add(VulnClass::fake_notification, effectful);
    }
    if (!random_evidence.empty()) add(VulnClass::predictable_randomness, random_evidence);
  }
  return findings;
}

// ---------------------------------------------------------------------------
// Execution

std::int64_t block_info_mix(BlockNum head_num, Ms head_timestamp, BlockNum ref_block_num) {
  Fnv1a64 h;
  h.put_u64(head_num);
  h.put_u64(static_cast<std::uint64_t>(head_timestamp));
  h.put_u64(ref_block_num);
  return static_cast<std::int64_t>(h.digest() % 100);
}

void set_code(World& w, const AccountName& account, std::shared_ptr<const ContractDef> code) {
  w.account(account).code = std::move(code);
}

namespace {

struct ExecCtx {
  World& w;
  const ExecEnv& env;
  const Transaction& tx;
  Hash64 tx_id;
  std::set<AccountName> direct_actors;
  AccountName first_actor;
  AccountName payer;  // CPU/NET payer for regular work
  std::map<AccountName, Ms> cpu_by_payer;
  Words net_words = 0;
  std::vector<Transaction> spawned;
  std::vector<ExecEvent> events;
  int spawn_counter = 0;
};

void bill(ExecCtx& ctx, Ms cpu) { ctx.cpu_by_payer[ctx.payer] += cpu; }

// Codes: the contract accounts whose authority is available on this dispatch
// path. A contract always commands its own authority; sending an inline adds
// the sender, so delegated (account, eosio.code) permissions resolve.
using CodeSet = std::set<AccountName>;

bool has_auth(ExecCtx& ctx, const AccountName& actor, const CodeSet& codes) {
  if (ctx.direct_actors.count(actor)) return true;
  if (codes.count(actor)) return true;
  if (ctx.tx.origin_code && *ctx.tx.origin_code == actor) return true;
  std::set<std::pair<AccountName, std::string>> provided;
  for (const auto& c : codes) provided.insert({c, "eosio.code"});
  if (ctx.tx.origin_code) provided.insert({*ctx.tx.origin_code, "eosio.code"});
  try {
    return satisfy_permission(ctx.w, actor, "active", ctx.tx.signers, provided);
  } catch (const sim_error&) {
    return false;
  }
}

void dispatch(ExecCtx& ctx, const AccountName& receiver, const AccountName& code,
              const Action& action, int depth, const CodeSet& codes);

void native_token_transfer(ExecCtx& ctx, const AccountName& from, const AccountName& to,
                           Tokens quantity, const std::string& memo, const CodeSet& codes,
                           int depth) {
  require(quantity > 0, errc::non_positive_quantity, std::to_string(quantity));
  require(from != to, errc::self_transfer, from.value);
  require(has_auth(ctx, from, codes), errc::auth_failure, "transfer from " + from.value);
  auto& fa = ctx.w.account(from);
  auto& ta = ctx.w.account(to);
  require(fa.balance(kCoreSymbol) >= quantity, errc::insufficient_balance,
          from.value + " has " + std::to_string(fa.balance(kCoreSymbol)) + " needs " +
              std::to_string(quantity));
  fa.balances[kCoreSymbol] -= quantity;
  ta.balances[kCoreSymbol] += quantity;
  bill(ctx, ctx.env.costs->transfer_cpu);
  ctx.net_words += ctx.env.costs->transfer_net;
  ctx.events.push_back({"transfer",
                        {{"from", from.value},
                         {"to", to.value},
                         {"amount", quantity},
                         {"memo", memo}}});

  // require_recipient semantics: both parties get the notification with
  // code = eosio.token.
  Action note;
  note.contract = AccountName("eosio.token");
  note.name = "transfer";
  note.payload = {{"from", from.value},
                  {"to", to.value},
                  {"amount", quantity},
                  {"memo", memo}};
  // notifications never lend the recipients any of the sender's authority
  dispatch(ctx, from, note.contract, note, depth + 1, {});
  dispatch(ctx, to, note.contract, note, depth + 1, {});
}

AccountName payload_name(const Payload& p, const std::string& field) {
  auto it = p.find(field);
  require(it != p.end(), errc::parse_error, "missing payload field '" + field + "'");
  return AccountName(as_str(it->second));
}

std::int64_t payload_int(const Payload& p, const std::string& field) {
  auto it = p.find(field);
  require(it != p.end(), errc::parse_error, "missing payload field '" + field + "'");
  return as_int(it->second);
}

void native_eosio_token(ExecCtx& ctx, const Action& action, int depth, const CodeSet& codes) {
  if (action.name == "transfer") {
    native_token_transfer(ctx, payload_name(action.payload, "from"),
                          payload_name(action.payload, "to"),
                          payload_int(action.payload, "amount"),
                          action.payload.count("memo") ? as_str(action.payload.at("memo")) : "",
                          codes, depth);
  } else if (action.name == "issue") {
    AccountName to = payload_name(action.payload, "to");
    Tokens amount = payload_int(action.payload, "amount");
    require(amount > 0, errc::non_positive_quantity, std::to_string(amount));
    require(has_auth(ctx, AccountName("eosio"), codes), errc::auth_failure,
            "issue requires eosio");
    ctx.w.account(to).balances[kCoreSymbol] += amount;
    bill(ctx, ctx.env.costs->transfer_cpu);
    ctx.events.push_back({"issue", {{"to", to.value}, {"amount", amount}}});
  } else {
    fail(errc::unknown_handler, "eosio.token::" + action.name);
  }
}

void native_eosio(ExecCtx& ctx, const Action& action, int depth, const CodeSet& codes) {
  const auto& p = action.payload;
  auto auth_of = [&](const AccountName& a) {
    require(has_auth(ctx, a, codes), errc::auth_failure,
            action.name + " requires " + a.value);
  };
  if (action.name == "newaccount") {
    AccountName creator = payload_name(p, "creator");
    AccountName name = payload_name(p, "name");
    auth_of(creator);
    KeyId key{as_str(p.at("key"))};
    create_account(ctx.w, creator, name, Permission::single_key("owner", key),
                   Permission::single_key("active", key), payload_int(p, "ram_payment"),
                   ctx.env.now);
    bill(ctx, ctx.env.costs->native_newaccount);
    ctx.events.push_back(
        {"account_created", {{"creator", creator.value}, {"name", name.value}}});
  } else if (action.name == "setcode") {
    AccountName account = payload_name(p, "account");
    auth_of(account);
    std::string code_name = as_str(p.at("code"));
    std::shared_ptr<const ContractDef> def;
    if (!code_name.empty()) {
      require(ctx.env.contract_registry && ctx.env.contract_registry->count(code_name),
              errc::config_error, "unknown contract '" + code_name + "'");
      def = ctx.env.contract_registry->at(code_name);
    }
    set_code(ctx.w, account, def);
    bill(ctx, ctx.env.costs->native_setcode);
    ctx.events.push_back({"setcode", {{"account", account.value}, {"code", code_name}}});
  } else if (action.name == "grantcode") {
    // Adds (code_account, eosio.code) to the active permission with weight
    // equal to the threshold, so the contract's authority alone satisfies it.
    AccountName account = payload_name(p, "account");
    AccountName code_account = payload_name(p, "code_account");
    auth_of(account);
    auto& perm = ctx.w.account(account).permissions.at("active");
    Authority ref = std::make_pair(code_account, std::string("eosio.code"));
    bool present = false;
    for (const auto& wa : perm.authorizations)
      if (wa.authority == ref) present = true;
    if (!present) perm.authorizations.push_back({ref, perm.threshold});
    bill(ctx, ctx.env.costs->native_admin);
    ctx.events.push_back(
        {"grantcode", {{"account", account.value}, {"code_account", code_account.value}}});
  } else if (action.name == "stake" || action.name == "unstake") {
    AccountName account = payload_name(p, "account");
    auth_of(account);
    Tokens amount = payload_int(p, "amount");
    ResKind kind = as_str(p.at("kind")) == "cpu" ? ResKind::cpu : ResKind::net;
    if (action.name == "stake") {
      AccountName to = p.count("to") ? payload_name(p, "to") : account;
      auto& a = ctx.w.account(account);
      require(a.balance(kCoreSymbol) >= amount, errc::insufficient_balance, account.value);
      require(amount > 0, errc::zero_amount, "stake");
      a.balances[kCoreSymbol] -= amount;
      ctx.w.resources.stake(to, amount, kind);
    } else {
      ctx.w.resources.unstake(account, amount, kind, ctx.env.now);
    }
    bill(ctx, ctx.env.costs->native_admin);
    ctx.events.push_back({action.name,
                          {{"account", account.value},
                           {"amount", amount},
                           {"kind", as_str(p.at("kind"))}}});
  } else if (action.name == "buyram") {
    AccountName account = payload_name(p, "account");
    auth_of(account);
    Tokens payment = payload_int(p, "payment");
    auto& a = ctx.w.account(account);
    require(a.balance(kCoreSymbol) >= payment, errc::insufficient_balance, account.value);
    a.balances[kCoreSymbol] -= payment;
    Bytes bytes = ctx.w.resources.buy_ram(account, payment);
    bill(ctx, ctx.env.costs->native_admin);
    ctx.events.push_back(
        {"buyram", {{"account", account.value}, {"payment", payment}, {"bytes", bytes}}});
  } else if (action.name == "sellram") {
    AccountName account = payload_name(p, "account");
    auth_of(account);
    Bytes bytes = payload_int(p, "bytes");
    Tokens proceeds = ctx.w.resources.sell_ram(account, bytes);
    ctx.w.account(account).balances[kCoreSymbol] += proceeds;
    bill(ctx, ctx.env.costs->native_admin);
    ctx.events.push_back(
        {"sellram", {{"account", account.value}, {"bytes", bytes}, {"proceeds", proceeds}}});
  } else {
    fail(errc::unknown_handler, "eosio::" + action.name);
  }
  (void)depth;
}

Action instantiate_template(const ActionTemplate& tmpl, const Payload& payload,
                            const AccountName& self) {
  Action a;
  a.contract = tmpl.contract;
  a.name = tmpl.action;
  AccountName auth_actor = self;
  for (const auto& [k, op] : tmpl.args) {
    Value v;
    switch (op.kind) {
      case Operand::Kind::int_lit: v = op.i; break;
      case Operand::Kind::str_lit: v = op.s; break;
      case Operand::Kind::field: {
        auto it = payload.find(op.s);
        require(it != payload.end(), errc::parse_error, "missing payload field '" + op.s + "'");
        v = it->second;
        break;
      }
    }
    if (k == "auth_") {
      auth_actor = AccountName(as_str(v));
      continue;
    }
    a.payload[k] = v;
  }
  a.authorizations.push_back({auth_actor, "active"});
  return a;
}

std::int64_t resolve_int(const Operand& op, const Payload& p) {
  switch (op.kind) {
    case Operand::Kind::int_lit: return op.i;
    case Operand::Kind::field: {
      auto it = p.find(op.s);
      require(it != p.end(), errc::parse_error, "missing payload field '" + op.s + "'");
      return as_int(it->second);
    }
    case Operand::Kind::str_lit:
      fail(errc::parse_error, "string operand in arithmetic: '" + op.s + "'");
  }
  return 0;
}

// Runs the steps of one handler. Returns false when a skip step ended the
// handler early (still success).
void run_steps(ExecCtx& ctx, const std::vector<Step>& steps, Payload& payload,
               const AccountName& receiver, const AccountName& code, const Action& action,
               int depth, bool& skipped, const CodeSet& codes) {
  const StepCosts& costs = *ctx.env.costs;
  CodeSet self_codes = codes;
  self_codes.insert(receiver);
  for (const auto& st : steps) {
    if (skipped) return;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, StepCheckAuth>) {
            bill(ctx, costs.check);
            AccountName actor = payload_name(payload, s.actor_field);
            require(has_auth(ctx, actor, self_codes), errc::auth_failure,
                    receiver.value + ": auth of " + actor.value);
          } else if constexpr (std::is_same_v<T, StepCheckCodeIs>) {
            bill(ctx, costs.check);
            require(code == s.account, errc::auth_failure,
                    receiver.value + ": code is " + code.value + ", expected " + s.account.value);
          } else if constexpr (std::is_same_v<T, StepCheckRecipientIsSelf>) {
            bill(ctx, costs.check);
            require(payload_name(payload, "to") == receiver, errc::auth_failure,
                    receiver.value + ": notification recipient is not self");
          } else if constexpr (std::is_same_v<T, StepSkipIfSenderIsSelf>) {
            bill(ctx, costs.check);
            if (payload.count("from") && payload_name(payload, "from") == receiver)
              skipped = true;
          } else if constexpr (std::is_same_v<T, StepArith>) {
            bill(ctx, costs.arith);
            std::uint64_t a = static_cast<std::uint64_t>(resolve_int(s.a, payload));
            std::uint64_t b = static_cast<std::uint64_t>(resolve_int(s.b, payload));
            std::uint64_t r = 0;
            bool overflow = false;
            switch (s.op) {
              case ArithOp::add: overflow = __builtin_add_overflow(a, b, &r); break;
              case ArithOp::sub: overflow = __builtin_sub_overflow(a, b, &r); break;
              case ArithOp::mul: overflow = __builtin_mul_overflow(a, b, &r); break;
            }
            if (s.mode == ArithMode::checked)
              require(!overflow, errc::overflow_trap,
                      receiver.value + ": checked arithmetic overflow");
            if (s.bound)
              require(r <= static_cast<std::uint64_t>(*s.bound), errc::overflow_trap,
                      receiver.value + ": bound check failed");
            payload[s.out_field] = static_cast<std::int64_t>(r);
          } else if constexpr (std::is_same_v<T, StepTransferOut>) {
            native_token_transfer(ctx, receiver, payload_name(payload, s.to_field),
                                  payload_int(payload, s.amount_field), "", self_codes, depth);
          } else if constexpr (std::is_same_v<T, StepStoreRow>) {
            bill(ctx, costs.store_row_cpu);
            AccountName payer = s.payer_self ? receiver : ctx.first_actor;
            AccountName author = ctx.first_actor;
            auto& rows = ctx.w.account(receiver).tables[s.table];
            if (s.quota) {
              std::int64_t mine = 0;
              for (const auto& [k, row] : rows)
                if (row.author == author) ++mine;
              require(mine < *s.quota, errc::quota_exceeded,
                      receiver.value + "/" + s.table + ": " + author.value + " at quota " +
                          std::to_string(*s.quota));
            }
            std::string key = [&] {
              auto it = payload.find(s.key_field);
              require(it != payload.end(), errc::parse_error,
                      "missing payload field '" + s.key_field + "'");
              if (const auto* i = std::get_if<std::int64_t>(&it->second))
                return std::to_string(*i);
              return as_str(it->second);
            }();
            auto existing = rows.find(key);
            if (existing != rows.end()) {
              ctx.w.resources.release_ram(existing->second.payer, existing->second.bytes);
              rows.erase(existing);
            }
            ctx.w.resources.use_ram(payer, s.bytes);
            rows[key] = {s.bytes, payer, author};
          } else if constexpr (std::is_same_v<T, StepNotify>) {
            bill(ctx, costs.notify);
            AccountName target = s.account.kind == Operand::Kind::field
                                     ? payload_name(payload, s.account.s)
                                     : AccountName(s.account.s);
            Action forwarded = action;
            forwarded.payload = payload;
            dispatch(ctx, target, code, forwarded, depth + 1, codes);
          } else if constexpr (std::is_same_v<T, StepSendInline>) {
            bill(ctx, costs.send_inline);
            Action inl = instantiate_template(s.tmpl, payload, receiver);
            dispatch(ctx, inl.contract, inl.contract, inl, depth + 1, self_codes);
          } else if constexpr (std::is_same_v<T, StepSendDeferred>) {
            AccountName sponsor = s.sponsor_self ? receiver : ctx.first_actor;
            for (int i = 0; i < s.count; ++i) {
              ctx.cpu_by_payer[sponsor] += costs.send_deferred;
              Action da = instantiate_template(s.tmpl, payload, receiver);
              // uniqueness nonce so sibling copies get distinct ids
              Fnv1a64 nh;
              nh.put_u64(ctx.tx_id);
              nh.put_u64(static_cast<std::uint64_t>(ctx.spawn_counter++));
              nh.put_u64(static_cast<std::uint64_t>(i));
              da.payload["nonce_"] = static_cast<std::int64_t>(nh.digest());
              Transaction dtx;
              dtx.actions.push_back(std::move(da));
              dtx.ref_block_num = ctx.env.head_num;
              dtx.expiration = ctx.env.now + s.delay + 3'600'000;
              dtx.deferred = Deferred{s.delay, sponsor};
              dtx.origin_code = receiver;
              ctx.spawned.push_back(std::move(dtx));
            }
            ctx.events.push_back({"deferred_scheduled",
                                  {{"by", receiver.value},
                                   {"action", s.tmpl.action},
                                   {"count", static_cast<std::int64_t>(s.count)},
                                   {"delay", s.delay}}});
          } else if constexpr (std::is_same_v<T, StepReadBlockInfo>) {
            bill(ctx, costs.read_block_info);
            std::int64_t v = 0;
            switch (s.what) {
              case BlockInfoKind::mix:
                v = block_info_mix(ctx.env.head_num, ctx.env.head_timestamp,
                                   ctx.tx.ref_block_num);
                break;
              case BlockInfoKind::number: v = static_cast<std::int64_t>(ctx.env.head_num); break;
              case BlockInfoKind::timestamp: v = ctx.env.head_timestamp; break;
              case BlockInfoKind::ref: v = static_cast<std::int64_t>(ctx.tx.ref_block_num); break;
            }
            payload[s.into_field] = v;
          } else if constexpr (std::is_same_v<T, StepBranchOn>) {
            bill(ctx, costs.branch);
            std::int64_t v = payload_int(payload, s.field);
            run_steps(ctx, v < s.threshold ? s.then_steps : s.else_steps, payload, receiver,
                      code, action, depth, skipped, codes);
          }
        },
        st.v);
  }
}

void dispatch(ExecCtx& ctx, const AccountName& receiver, const AccountName& code,
              const Action& action, int depth, const CodeSet& codes) {
  require(depth <= kInlineDepthLimit, errc::depth_exceeded,
          "dispatch depth " + std::to_string(depth));
  if (receiver == code) {
    if (code.value == "eosio.token") return native_eosio_token(ctx, action, depth, codes);
    if (code.value == "eosio") return native_eosio(ctx, action, depth, codes);
  }
  require(ctx.w.has_account(receiver), errc::unknown_account, receiver.value);
  const auto& acct = ctx.w.accounts.at(receiver);
  const HandlerSpec* handler = acct.code ? acct.code->find_handler(code, action.name) : nullptr;
  if (!handler) {
    // Calling a missing action on the code account itself is an error (the
    // block-delay invalidation mechanism); unhandled notifications are no-ops.
    require(receiver != code, errc::unknown_handler,
            receiver.value + "::" + action.name);
    return;
  }
  Payload payload = action.payload;  // handler-local, arith writes stay local
  bool skipped = false;
  run_steps(ctx, handler->steps, payload, receiver, code, action, depth, skipped, codes);
}

}  // namespace

ExecResult apply_transaction(World& w, const Transaction& tx, const ExecEnv& env) {
  ExecResult res;
  World scratch = w;
  ExecCtx ctx{scratch, env, tx, transaction_id(tx)};
  try {
    require(!tx.actions.empty(), errc::parse_error, "transaction with no actions");
    // Validate declared authorizations against signers (plus, for contract-
    // spawned transactions, the originating code's authority).
    std::set<std::pair<AccountName, std::string>> provided;
    if (tx.origin_code) provided.insert({*tx.origin_code, "eosio.code"});
    for (const auto& a : tx.actions) {
      require(w.has_account(a.contract), errc::unknown_account, a.contract.value);
      for (const auto& auth : a.authorizations) {
        // a contract-spawned transaction acts under its own code's authority
        bool self_origin = tx.origin_code && *tx.origin_code == auth.actor;
        require(self_origin || satisfy_permission(scratch, auth.actor, auth.permission,
                                                  tx.signers, provided),
                errc::auth_failure, auth.actor.value + "@" + auth.permission);
        ctx.direct_actors.insert(auth.actor);
        if (ctx.first_actor.value.empty()) ctx.first_actor = auth.actor;
      }
    }
    if (ctx.first_actor.value.empty()) ctx.first_actor = tx.actions.front().contract;
    // The deferred sponsor pays; otherwise the first authorizer does.
    ctx.payer = tx.deferred ? tx.deferred->sponsor : ctx.first_actor;

    // base NET charge: canonical size in words, rounded up
    auto bytes = serialize_canonical(tx);
    ctx.net_words += static_cast<Words>((bytes.size() + 7) / 8);

    for (const auto& a : tx.actions) dispatch(ctx, a.contract, a.contract, a, 1, {});

    // resource billing; cpu_exhausted / net_exhausted abort the whole tx
    for (const auto& [payer, cpu] : ctx.cpu_by_payer) {
      Words net = (payer == ctx.payer) ? ctx.net_words : 0;
      scratch.resources.consume(payer, cpu, net, env.now);
      res.cpu_ms += cpu;
    }
    if (!ctx.cpu_by_payer.count(ctx.payer) && ctx.net_words > 0)
      scratch.resources.consume(ctx.payer, 0, ctx.net_words, env.now);
    res.net_words = ctx.net_words;

    w = std::move(scratch);
    res.ok = true;
    res.spawned_deferred = std::move(ctx.spawned);
    res.events = std::move(ctx.events);
  } catch (const sim_error& e) {
    res.ok = false;
    res.error = e.code;
    res.error_msg = e.what();
    res.cpu_ms = 0;
    res.net_words = 0;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Read-mode queries (here because speculative mode needs the executor)

Tokens query_balance(const ChainState& s, ReadMode mode, const AccountName& account,
                     const std::string& symbol, const std::vector<Transaction>* pending) {
  auto read = [&](const World& w) -> Tokens {
    return w.has_account(account) ? w.accounts.at(account).balance(symbol) : 0;
  };
  switch (mode) {
    case ReadMode::irreversible: return read(s.lib_world);
    case ReadMode::head:
    case ReadMode::read_only: return read(s.world);
    case ReadMode::speculative: {
      if (!pending || pending->empty()) return read(s.world);
      World overlay = s.world;
      StepCosts costs;
      ExecEnv env;
      env.head_num = s.head;
      env.head_timestamp = s.head_timestamp();
      env.now = s.head_timestamp();
      env.costs = &costs;
      for (const auto& tx : *pending) apply_transaction(overlay, tx, env);
      return read(overlay);
    }
  }
  return 0;
}

}  // namespace eossim
