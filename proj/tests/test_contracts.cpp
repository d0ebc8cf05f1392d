#include <doctest.h>

#include "eossim/contracts.hpp"

using namespace eossim;

namespace {

const std::string kContractDir = std::string(EOSSIM_SOURCE_DIR) + "/contracts";

World exec_world() {
  World w;
  auto mk = [&](const std::string& n) -> Account& {
    Account a;
    a.name = AccountName(n);
    a.permissions.emplace("owner", Permission::single_key("owner", KeyId{"ko." + n}));
    a.permissions.emplace("active", Permission::single_key("active", KeyId{"k." + n}));
    return w.accounts.emplace(a.name, std::move(a)).first->second;
  };
  mk("eosio");
  mk("eosio.token");
  mk("alice").balances[kCoreSymbol] = 1'000'000;
  mk("bob").balances[kCoreSymbol] = 1'000'000;
  mk("vault").balances[kCoreSymbol] = 1'000'000;
  w.account(AccountName("eosio")).balances[kCoreSymbol] = 100'000'000;
  for (const char* n : {"alice", "bob", "vault", "eosio"}) {
    w.resources.stake(AccountName(n), 1000, ResKind::cpu);
    w.resources.stake(AccountName(n), 1000, ResKind::net);
  }
  return w;
}

StepCosts kCosts;

ExecEnv env_at(Ms now, BlockNum head = 10, Ms head_ts = 5'000) {
  ExecEnv e;
  e.head_num = head;
  e.head_timestamp = head_ts;
  e.now = now;
  e.costs = &kCosts;
  return e;
}

Transaction tx_for(const std::string& actor, const std::string& contract,
                   const std::string& action, Payload payload) {
  Transaction tx;
  Action a;
  a.contract = AccountName(contract);
  a.name = action;
  a.payload = std::move(payload);
  a.authorizations.push_back({AccountName(actor), "active"});
  tx.actions.push_back(std::move(a));
  tx.expiration = 1'000'000;
  tx.signers.insert(KeyId{"k." + actor});
  return tx;
}

std::set<VulnClass> classes_of(const ContractDef& c) {
  std::set<VulnClass> out;
  for (const auto& f : check_vulnerabilities(c)) out.insert(f.vclass);
  return out;
}

}  // namespace

TEST_CASE("descriptor round-trips through parse and serialize") {
  ContractDef c = parse_contract_file(kContractDir + "/roll-vuln.ctr");
  CHECK(c.owner.value == "gamble");
  REQUIRE(c.handlers.size() == 1);
  std::string text = serialize_contract(c);
  ContractDef c2 = parse_contract(text);
  CHECK(serialize_contract(c2) == text);

  ContractDef c3 = parse_contract_file(kContractDir + "/fakeeos-safe.ctr");
  CHECK(serialize_contract(parse_contract(serialize_contract(c3))) == serialize_contract(c3));
}

TEST_CASE("parse errors cite line numbers") {
  auto expect_line = [](const std::string& text, const std::string& needle) {
    try {
      parse_contract(text);
      FAIL("expected parse error");
    } catch (const sim_error& e) {
      CHECK(e.code == errc::parse_error);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_line("contract a\nhandler a act\n  bogus_step x=1\n", "line 3");
  expect_line("contract a\nhandler a act\n  arith op=div mode=wrapping out=x a=1 b=1\n",
              "unknown arith op");
  expect_line("contract a\nhandler a act\n  branch_on field=x threshold=1\n  then\n",
              "needs 'end'");
  expect_line("handler a act\n", "missing 'contract");
  expect_line("contract a\nhandler a act\nhandler a act\n", "duplicate handler");
}

TEST_CASE("checker labels the whole corpus correctly") {
  auto check_file = [&](const std::string& file, std::set<VulnClass> expected) {
    CAPTURE(file);
    ContractDef c = parse_contract_file(kContractDir + "/" + file);
    CHECK(classes_of(c) == expected);
  };
  check_file("overflow-vuln.ctr", {VulnClass::integer_overflow});
  check_file("overflow-safe.ctr", {});
  check_file("missingauth-vuln.ctr", {VulnClass::missing_auth});
  check_file("missingauth-safe.ctr", {});
  check_file("fakeeos-vuln.ctr", {VulnClass::fake_eos});
  check_file("fakeeos-safe.ctr", {});
  check_file("fakenote-vuln.ctr", {VulnClass::fake_notification});
  check_file("fakenote-safe.ctr", {});
  check_file("roll-vuln.ctr", {VulnClass::predictable_randomness});
  check_file("roll-safe.ctr", {});
  // scenario support contracts carry no findings themselves
  for (const char* f : {"spambot.ctr", "victimdapp.ctr", "victimdapp-hard.ctr", "helper.ctr",
                        "drain.ctr", "faketoken.ctr", "relay.ctr", "pinboard-hard.ctr"})
    check_file(f, {});
}

TEST_CASE("checker details: taint flow and evidence") {
  ContractDef c = parse_contract(
      "contract t\n"
      "handler t go\n"
      "  arith op=add mode=wrapping out=x a=@a b=@b\n"
      "  arith op=add mode=checked out=y a=@x b=1\n"  // taint propagates
      "  transfer_out to=who amount=y\n");
  auto fs = check_vulnerabilities(c);
  bool overflow = false;
  for (const auto& f : fs)
    if (f.vclass == VulnClass::integer_overflow) {
      overflow = true;
      REQUIRE(f.evidence.size() >= 2);
      CHECK(f.evidence[0] == 1);  // last arith that produced the tainted field
      CHECK(f.evidence[1] == 2);  // the sink
    }
  CHECK(overflow);

  // a bound check sanitizes
  ContractDef c2 = parse_contract(
      "contract t\n"
      "handler t go\n"
      "  check_auth actor=who\n"
      "  arith op=add mode=wrapping out=x a=@a b=@b bound=1000\n"
      "  transfer_out to=who amount=x\n");
  CHECK(classes_of(c2).empty());

  // overwriting the tainted field with clean data clears it
  ContractDef c3 = parse_contract(
      "contract t\n"
      "handler t go\n"
      "  check_auth actor=who\n"
      "  arith op=add mode=wrapping out=x a=@a b=@b\n"
      "  arith op=add mode=checked out=x a=1 b=2\n"
      "  transfer_out to=who amount=x\n");
  CHECK(classes_of(c3).empty());
}

TEST_CASE("randomness guarding a store only is not flagged") {
  ContractDef c = parse_contract(
      "contract t\n"
      "handler t go\n"
      "  check_auth actor=who\n"
      "  read_block_info into=r\n"
      "  branch_on field=r threshold=50\n"
      "  then\n"
      "    store_row table=x key=r bytes=8\n"
      "  end\n");
  CHECK(classes_of(c).empty());
}

TEST_CASE("native token transfer moves balances and bills the payer") {
  World w = exec_world();
  auto r = apply_transaction(
      w, tx_for("alice", "eosio.token", "transfer",
                {{"from", std::string("alice")},
                 {"to", std::string("bob")},
                 {"amount", std::int64_t{2'500}},
                 {"memo", std::string("hi")}}),
      env_at(100));
  REQUIRE(r.ok);
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 997'500);
  CHECK(w.account(AccountName("bob")).balance(kCoreSymbol) == 1'002'500);
  CHECK(r.cpu_ms == kCosts.transfer_cpu);
  CHECK(r.net_words > kCosts.transfer_net);  // plus base serialization words
  CHECK(w.resources.acct(AccountName("alice")).cpu_used == r.cpu_ms);
}

TEST_CASE("transfer failure modes") {
  World w = exec_world();
  Hash64 before = world_hash(w);
  auto run = [&](const std::string& actor, Payload p) {
    return apply_transaction(w, tx_for(actor, "eosio.token", "transfer", std::move(p)),
                             env_at(100));
  };
  auto r = run("alice", {{"from", std::string("alice")},
                         {"to", std::string("bob")},
                         {"amount", std::int64_t{2'000'000}}});
  CHECK(!r.ok);
  CHECK(r.error == errc::insufficient_balance);
  r = run("alice", {{"from", std::string("alice")},
                    {"to", std::string("alice")},
                    {"amount", std::int64_t{1}}});
  CHECK(r.error == errc::self_transfer);
  r = run("alice", {{"from", std::string("alice")},
                    {"to", std::string("bob")},
                    {"amount", std::int64_t{0}}});
  CHECK(r.error == errc::non_positive_quantity);
  r = run("bob", {{"from", std::string("alice")},
                  {"to", std::string("bob")},
                  {"amount", std::int64_t{1}}});
  CHECK(r.error == errc::auth_failure);  // bob cannot spend alice's funds
  CHECK(world_hash(w) == before);        // every failure rolled back completely
}

TEST_CASE("declared authorizations are validated against signers") {
  World w = exec_world();
  Transaction tx = tx_for("alice", "eosio.token", "transfer",
                          {{"from", std::string("alice")},
                           {"to", std::string("bob")},
                           {"amount", std::int64_t{1}}});
  tx.signers.clear();  // declared alice@active but nobody signed
  auto r = apply_transaction(w, tx, env_at(100));
  CHECK(!r.ok);
  CHECK(r.error == errc::auth_failure);
}

TEST_CASE("wrapping vs checked arithmetic at runtime") {
  World w = exec_world();
  auto vuln = std::make_shared<const ContractDef>(
      parse_contract_file(kContractDir + "/overflow-vuln.ctr"));
  auto safe = std::make_shared<const ContractDef>(
      parse_contract_file(kContractDir + "/overflow-safe.ctr"));
  // (2^63 + 500) * 2 == 2^64 + 1000, which wraps down to a 1000 payout
  Payload claim = {{"who", std::string("alice")},
                   {"units", static_cast<std::int64_t>((1ull << 63) + 500ull)},
                   {"price", std::int64_t{2}}};

  set_code(w, AccountName("vault"), vuln);
  auto r = apply_transaction(w, tx_for("alice", "vault", "claim", claim), env_at(100));
  REQUIRE(r.ok);
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 1'001'000);

  World w2 = exec_world();
  set_code(w2, AccountName("vault"), safe);
  auto r2 = apply_transaction(w2, tx_for("alice", "vault", "claim", claim), env_at(100));
  CHECK(!r2.ok);
  CHECK(r2.error == errc::overflow_trap);
}

TEST_CASE("store_row charges ram to the payer and respects quotas") {
  World w = exec_world();
  w.resources.buy_ram(AccountName("vault"), 100'000);
  auto board = std::make_shared<const ContractDef>(
      parse_contract(serialize_contract(parse_contract_file(kContractDir + "/pinboard.ctr"))));
  // deploy the pinboard code on vault for this test
  ContractDef def = *board;
  set_code(w, AccountName("vault"),
           std::make_shared<const ContractDef>(ContractDef{
               AccountName("vault"),
               {{AccountName("vault"), "post", def.handlers[0].steps}},
               ""}));
  auto r = apply_transaction(
      w, tx_for("alice", "vault", "post", {{"key", std::int64_t{1}}}), env_at(100));
  REQUIRE(r.ok);
  CHECK(w.resources.acct(AccountName("vault")).ram_used == 10'000);
  // same key again: the old row is released first
  r = apply_transaction(w, tx_for("alice", "vault", "post", {{"key", std::int64_t{1}}}),
                        env_at(200));
  REQUIRE(r.ok);
  CHECK(w.resources.acct(AccountName("vault")).ram_used == 10'000);

  SUBCASE("ram runs out eventually") {
    ExecResult last;
    for (std::int64_t k = 2; k < 16; ++k)
      last = apply_transaction(w, tx_for("alice", "vault", "post", {{"key", k}}),
                               env_at(300 + k));
    CHECK(!last.ok);
    CHECK(last.error == errc::ram_exhausted);
  }
}

TEST_CASE("quota limits rows per author") {
  World w = exec_world();
  w.resources.buy_ram(AccountName("vault"), 500'000);
  ContractDef hard = parse_contract_file(kContractDir + "/pinboard-hard.ctr");
  set_code(w, AccountName("vault"),
           std::make_shared<const ContractDef>(ContractDef{
               AccountName("vault"),
               {{AccountName("vault"), "post", hard.handlers[0].steps}},
               ""}));
  ExecResult r;
  for (std::int64_t k = 0; k < 6; ++k)
    r = apply_transaction(
        w, tx_for("alice", "vault", "post", {{"who", std::string("alice")}, {"key", k}}),
        env_at(100 + k));
  CHECK(!r.ok);
  CHECK(r.error == errc::quota_exceeded);
  CHECK(w.resources.acct(AccountName("vault")).ram_used == 50'000);  // five rows stuck
}

TEST_CASE("send_deferred spawns sponsored transactions with unique ids") {
  World w = exec_world();
  ContractDef bot = parse_contract_file(kContractDir + "/spambot.ctr");
  Account a;
  a.name = AccountName("mallory");
  a.permissions.emplace("owner", Permission::single_key("owner", KeyId{"ko.mallory"}));
  a.permissions.emplace("active", Permission::single_key("active", KeyId{"k.mallory"}));
  w.accounts.emplace(a.name, std::move(a));
  w.resources.stake(AccountName("mallory"), 1000, ResKind::cpu);
  w.resources.stake(AccountName("mallory"), 1000, ResKind::net);
  set_code(w, AccountName("mallory"), std::make_shared<const ContractDef>(bot));

  auto r = apply_transaction(
      w, tx_for("mallory", "mallory", "spam", {{"seq", std::int64_t{0}}}), env_at(100));
  REQUIRE(r.ok);
  REQUIRE(r.spawned_deferred.size() == 22);  // 2 replicas + 20 junk jobs
  std::set<Hash64> ids;
  for (const auto& d : r.spawned_deferred) {
    ids.insert(transaction_id(d));
    REQUIRE(d.deferred.has_value());
    CHECK(d.deferred->delay == 500);
    CHECK(d.deferred->sponsor.value == "mallory");
    CHECK(d.origin_code->value == "mallory");
  }
  CHECK(ids.size() == 22);  // the nonce keeps sibling copies distinct
  // the sponsor was billed for the sends
  CHECK(w.resources.acct(AccountName("mallory")).cpu_used >= 22 * kCosts.send_deferred);
}

TEST_CASE("inline depth limit stops runaway notification chains") {
  World w = exec_world();
  // a contract that notifies itself back and forth with bob
  auto ping = parse_contract(
      "contract alice\n"
      "handler alice go\n"
      "  notify account=bob\n");
  auto pong = parse_contract(
      "contract bob\n"
      "handler alice go\n"
      "  notify account=alice\n");
  // alice's own handler for the bounced-back notification
  auto ping2 = parse_contract(
      "contract alice\n"
      "handler alice go\n"
      "  notify account=bob\n");
  set_code(w, AccountName("alice"), std::make_shared<const ContractDef>(ping2));
  set_code(w, AccountName("bob"), std::make_shared<const ContractDef>(pong));
  auto r = apply_transaction(w, tx_for("alice", "alice", "go", {}), env_at(100));
  CHECK(!r.ok);
  CHECK(r.error == errc::depth_exceeded);
  (void)ping;
}

TEST_CASE("block info mix matches the frozen oracle and drives branches") {
  CHECK(block_info_mix(12, 6'000, 9) == 93);  // independently computed
  CHECK(block_info_mix(12, 6'000, 9) == block_info_mix(12, 6'000, 9));
  CHECK(block_info_mix(13, 6'000, 9) != block_info_mix(12, 6'000, 9));

  World w = exec_world();
  ContractDef roll = parse_contract_file(kContractDir + "/roll-vuln.ctr");
  Account g;
  g.name = AccountName("gamble");
  g.permissions.emplace("owner", Permission::single_key("owner", KeyId{"ko.g"}));
  g.permissions.emplace("active", Permission::single_key("active", KeyId{"k.g"}));
  g.balances[kCoreSymbol] = 1'000'000;
  w.accounts.emplace(g.name, std::move(g));
  w.resources.stake(AccountName("gamble"), 1000, ResKind::cpu);
  w.resources.stake(AccountName("gamble"), 1000, ResKind::net);
  set_code(w, AccountName("gamble"), std::make_shared<const ContractDef>(roll));

  // pick an env where the mix is a loss and one where it wins
  ExecEnv lose = env_at(100, 12, 6'000);  // mix 93 >= 48
  Transaction bet = tx_for("alice", "gamble", "bet",
                           {{"player", std::string("alice")}, {"wager", std::int64_t{100}}});
  bet.ref_block_num = 9;
  auto r = apply_transaction(w, bet, lose);
  REQUIRE(r.ok);
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 999'900);  // wager gone

  BlockNum head = 12;
  while (block_info_mix(head, 6'000, 9) >= 48) ++head;
  auto r2 = apply_transaction(w, bet, env_at(100, head, 6'000));
  REQUIRE(r2.ok);
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 999'900 + 100);  // +2x -1x
}

TEST_CASE("newaccount, stake, buyram and setcode natives") {
  World w = exec_world();
  std::map<std::string, std::shared_ptr<const ContractDef>> registry;
  registry["wallet"] = std::make_shared<const ContractDef>(
      parse_contract_file(kContractDir + "/missingauth-safe.ctr"));
  ExecEnv env = env_at(100);
  env.contract_registry = &registry;

  auto r = apply_transaction(w,
                             tx_for("alice", "eosio", "newaccount",
                                    {{"creator", std::string("alice")},
                                     {"name", std::string("wallet")},
                                     {"key", std::string("k.wallet")},
                                     {"ram_payment", std::int64_t{4'000}}}),
                             env);
  REQUIRE(r.ok);
  CHECK(w.has_account(AccountName("wallet")));

  r = apply_transaction(w,
                        tx_for("alice", "eosio", "stake",
                               {{"account", std::string("alice")},
                                {"amount", std::int64_t{500}},
                                {"kind", std::string("cpu")}}),
                        env);
  REQUIRE(r.ok);
  CHECK(w.resources.acct(AccountName("alice")).staked_cpu == 1'500);

  // delegate bandwidth so the new account can pay for its own transactions
  for (const char* kind : {"cpu", "net"}) {
    r = apply_transaction(w,
                          tx_for("alice", "eosio", "stake",
                                 {{"account", std::string("alice")},
                                  {"to", std::string("wallet")},
                                  {"amount", std::int64_t{200}},
                                  {"kind", std::string(kind)}}),
                          env);
    REQUIRE(r.ok);
  }

  Transaction sc = tx_for("wallet", "eosio", "setcode",
                          {{"account", std::string("wallet")}, {"code", std::string("wallet")}});
  r = apply_transaction(w, sc, env);
  REQUIRE(r.ok);
  CHECK(w.account(AccountName("wallet")).code != nullptr);

  SUBCASE("setcode needs the account's own authority") {
    Transaction bad = tx_for("bob", "eosio", "setcode",
                             {{"account", std::string("wallet")}, {"code", std::string()}});
    auto rb = apply_transaction(w, bad, env);
    CHECK(!rb.ok);
    CHECK(rb.error == errc::auth_failure);
  }
  SUBCASE("clearing code works") {
    Transaction clr = tx_for("wallet", "eosio", "setcode",
                             {{"account", std::string("wallet")}, {"code", std::string()}});
    auto rc = apply_transaction(w, clr, env);
    REQUIRE(rc.ok);
    CHECK(w.account(AccountName("wallet")).code == nullptr);
  }
}

TEST_CASE("grantcode delegates authority that inline actions can use") {
  World w = exec_world();
  // helper account with the drain code
  Account h;
  h.name = AccountName("helper");
  h.permissions.emplace("owner", Permission::single_key("owner", KeyId{"ko.helper"}));
  h.permissions.emplace("active", Permission::single_key("active", KeyId{"k.helper"}));
  w.accounts.emplace(h.name, std::move(h));
  w.resources.stake(AccountName("helper"), 1000, ResKind::cpu);
  w.resources.stake(AccountName("helper"), 1000, ResKind::net);
  set_code(w, AccountName("helper"),
           std::make_shared<const ContractDef>(parse_contract_file(kContractDir + "/drain.ctr")));

  Payload sweep = {{"victim", std::string("alice")},
                   {"to", std::string("bob")},
                   {"amount", std::int64_t{123'456}}};
  // without the grant, the sweep cannot spend alice's funds
  auto r = apply_transaction(w, tx_for("bob", "helper", "sweep", sweep), env_at(100));
  CHECK(!r.ok);
  CHECK(r.error == errc::auth_failure);

  auto g = apply_transaction(w,
                             tx_for("alice", "eosio", "grantcode",
                                    {{"account", std::string("alice")},
                                     {"code_account", std::string("helper")}}),
                             env_at(200));
  REQUIRE(g.ok);
  r = apply_transaction(w, tx_for("bob", "helper", "sweep", sweep), env_at(300));
  REQUIRE(r.ok);
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 1'000'000 - 123'456);
  CHECK(w.account(AccountName("bob")).balance(kCoreSymbol) == 1'000'000 + 123'456);
}

TEST_CASE("query_balance honors read modes") {
  ChainState s;
  s.world = exec_world();
  s.lib_world = s.world;
  s.world.account(AccountName("alice")).balances[kCoreSymbol] = 500;  // head moved on

  AccountName alice("alice");
  CHECK(query_balance(s, ReadMode::head, alice, kCoreSymbol) == 500);
  CHECK(query_balance(s, ReadMode::read_only, alice, kCoreSymbol) == 500);
  CHECK(query_balance(s, ReadMode::irreversible, alice, kCoreSymbol) == 1'000'000);

  std::vector<Transaction> pending;
  pending.push_back(tx_for("alice", "eosio.token", "transfer",
                           {{"from", std::string("alice")},
                            {"to", std::string("bob")},
                            {"amount", std::int64_t{200}}}));
  CHECK(query_balance(s, ReadMode::speculative, alice, kCoreSymbol, &pending) == 300);
  CHECK(query_balance(s, ReadMode::head, alice, kCoreSymbol, &pending) == 500);
  // the speculative overlay never touches the real state
  CHECK(s.world.account(alice).balance(kCoreSymbol) == 500);
}
