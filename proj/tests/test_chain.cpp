#include <doctest.h>

#include "eossim/chain.hpp"

using namespace eossim;

namespace {

World basic_world() {
  World w;
  for (const char* n : {"alice", "bob", "carol"}) {
    Account a;
    a.name = AccountName(n);
    a.permissions.emplace("owner",
                          Permission::single_key("owner", KeyId{std::string("ko.") + n}));
    a.permissions.emplace("active",
                          Permission::single_key("active", KeyId{std::string("k.") + n}));
    w.accounts.emplace(a.name, std::move(a));
  }
  return w;
}

}  // namespace

TEST_CASE("account names accept 1..12 chars of a-z 1-5 and dot") {
  CHECK(AccountName::valid("alice"));
  CHECK(AccountName::valid("eosio.token"));
  CHECK(AccountName::valid("a1234"));
  CHECK(AccountName::valid("bp5"));
  CHECK(AccountName::valid("aaaaaaaaaaaa"));   // 12 chars
  CHECK(!AccountName::valid(""));
  CHECK(!AccountName::valid("aaaaaaaaaaaaa"));  // 13 chars
  CHECK(!AccountName::valid("Alice"));
  CHECK(!AccountName::valid("alice6"));
  CHECK(!AccountName::valid("alice_x"));
  CHECK(!AccountName::valid("al ice"));
  CHECK_THROWS_AS(AccountName("BAD"), sim_error);
}

TEST_CASE("permission construction validates its invariants") {
  KeyId k1{"k1"}, k2{"k2"};
  CHECK_THROWS_AS(Permission::make("p", 0, {{k1, 1}}), sim_error);
  CHECK_THROWS_AS(Permission::make("p", 1, {}), sim_error);
  CHECK_THROWS_AS(Permission::make("p", 1, {{k1, 0}}), sim_error);
  CHECK_THROWS_AS(Permission::make("p", 1, {{k1, 1}, {k1, 1}}), sim_error);
  CHECK_THROWS_AS(Permission::make("p", 3, {{k1, 1}, {k2, 1}}), sim_error);
  CHECK_NOTHROW(Permission::make("p", 2, {{k1, 1}, {k2, 1}}));
}

TEST_CASE("single key permission is satisfied by its signer only") {
  World w = basic_world();
  AccountName alice("alice");
  CHECK(satisfy_permission(w, alice, "active", {KeyId{"k.alice"}}));
  CHECK(!satisfy_permission(w, alice, "active", {KeyId{"k.bob"}}));
  CHECK(!satisfy_permission(w, alice, "active", {}));
  CHECK(satisfy_permission(w, alice, "owner", {KeyId{"ko.alice"}}));
}

TEST_CASE("weighted multi-sig thresholds") {
  World w = basic_world();
  AccountName alice("alice");
  KeyId a{"ka"}, b{"kb"}, c{"kc"};
  w.account(alice).permissions["active"] =
      Permission::make("active", 3, {{a, 2}, {b, 1}, {c, 1}});
  CHECK(satisfy_permission(w, alice, "active", {a, b}));
  CHECK(satisfy_permission(w, alice, "active", {a, c}));
  CHECK(satisfy_permission(w, alice, "active", {a, b, c}));
  CHECK(!satisfy_permission(w, alice, "active", {a}));
  CHECK(!satisfy_permission(w, alice, "active", {b, c}));
}

TEST_CASE("nested account authorities resolve recursively") {
  World w = basic_world();
  AccountName alice("alice"), bob("bob");
  w.account(alice).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(bob, std::string("active")), 1}});
  CHECK(satisfy_permission(w, alice, "active", {KeyId{"k.bob"}}));
  CHECK(!satisfy_permission(w, alice, "active", {KeyId{"k.alice"}}));
}

TEST_CASE("provided code authorities satisfy without signatures") {
  World w = basic_world();
  AccountName alice("alice"), code("helper");
  Account h;
  h.name = code;
  h.permissions.emplace("active", Permission::single_key("active", KeyId{"k.h"}));
  w.accounts.emplace(code, std::move(h));
  w.account(alice).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(code, std::string("eosio.code")), 1}});
  CHECK(satisfy_permission(w, alice, "active", {}, {{code, "eosio.code"}}));
  CHECK(!satisfy_permission(w, alice, "active", {}));
}

TEST_CASE("unresolvable references contribute nothing, deep chains abort") {
  World w = basic_world();
  AccountName alice("alice");
  // reference to a permission that does not exist: just zero weight
  w.account(alice).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(AccountName("ghost"), std::string("active")), 1}});
  CHECK(!satisfy_permission(w, alice, "active", {KeyId{"k.alice"}}));

  // a -> b -> c -> a self-cycle via 5 hops exceeds the depth limit
  AccountName bob("bob"), carol("carol");
  w.account(alice).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(bob, std::string("active")), 1}});
  w.account(bob).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(carol, std::string("active")), 1}});
  w.account(carol).permissions["active"] = Permission::make(
      "active", 1, {{std::make_pair(alice, std::string("active")), 1}});
  CHECK_THROWS_AS(satisfy_permission(w, alice, "active", {KeyId{"nope"}}), sim_error);
}

TEST_CASE("canonical transaction serialization and id") {
  Transaction tx;
  Action a;
  a.contract = AccountName("eosio.token");
  a.name = "transfer";
  a.payload = {{"amount", std::int64_t{500}},
               {"from", std::string("alice")},
               {"to", std::string("bob")}};
  a.authorizations.push_back({AccountName("alice"), "active"});
  tx.actions.push_back(a);
  tx.ref_block_num = 7;
  tx.expiration = 60'000;

  auto bytes = serialize_canonical(tx);
  CHECK(bytes.size() == 175);  // independently computed
  CHECK(transaction_id(tx) == 0x5b023e6427b16633ULL);

  SUBCASE("signers are excluded from the id") {
    Transaction tx2 = tx;
    tx2.signers.insert(KeyId{"whoever"});
    CHECK(transaction_id(tx2) == transaction_id(tx));
  }
  SUBCASE("origin_code is part of the id") {
    Transaction tx2 = tx;
    tx2.origin_code = AccountName("spambot");
    CHECK(transaction_id(tx2) != transaction_id(tx));
  }
  SUBCASE("payload insertion order is irrelevant") {
    Transaction tx2 = tx;
    tx2.actions[0].payload.clear();
    tx2.actions[0].payload["to"] = std::string("bob");
    tx2.actions[0].payload["from"] = std::string("alice");
    tx2.actions[0].payload["amount"] = std::int64_t{500};
    CHECK(transaction_id(tx2) == transaction_id(tx));
  }
  SUBCASE("any field change changes the id") {
    Transaction tx2 = tx;
    tx2.actions[0].payload["amount"] = std::int64_t{501};
    CHECK(transaction_id(tx2) != transaction_id(tx));
    Transaction tx3 = tx;
    tx3.deferred = Deferred{1000, AccountName("alice")};
    CHECK(transaction_id(tx3) != transaction_id(tx));
  }
}

TEST_CASE("deferred queue orders by due time then id, push is idempotent") {
  DeferredQueue q;
  auto mk = [](std::int64_t n) {
    Transaction tx;
    Action a;
    a.contract = AccountName("eosio.token");
    a.name = "transfer";
    a.payload["n"] = n;
    tx.actions.push_back(a);
    return tx;
  };
  Transaction t1 = mk(1), t2 = mk(2), t3 = mk(3);
  q.push(2000, t2);
  q.push(1000, t1);
  q.push(3000, t3);
  q.push(1000, t1);  // duplicate
  CHECK(q.size() == 3);

  auto due = q.peek_due(500);
  CHECK(!due.has_value());
  due = q.peek_due(1500);
  REQUIRE(due.has_value());
  CHECK(due->first == 1000);
  CHECK(transaction_id(due->second) == transaction_id(t1));
  q.pop_front();
  CHECK(q.size() == 2);
  CHECK(q.erase_id(transaction_id(t3)));
  CHECK(!q.erase_id(transaction_id(t3)));
  CHECK(q.size() == 1);
}

TEST_CASE("create_account charges the creator and reserves the footprint") {
  World w = basic_world();
  w.account(AccountName("alice")).balances[kCoreSymbol] = 100'000;
  AccountName newacct("newbie");
  // 3100 paid: fee floor(3100*0.005)=15, bytes (3100-15)/1 = 3085 >= 3000
  create_account(w, AccountName("alice"), newacct,
                 Permission::single_key("owner", KeyId{"ko.n"}),
                 Permission::single_key("active", KeyId{"k.n"}), 3100, 42);
  CHECK(w.has_account(newacct));
  CHECK(w.account(AccountName("alice")).balance(kCoreSymbol) == 100'000 - 3100);
  const auto* r = w.resources.find(newacct);
  REQUIRE(r != nullptr);
  CHECK(r->ram_owned == 3085);
  CHECK(r->ram_used == kAccountRamFootprint);
  CHECK(w.resources.fees_burned == 15);

  SUBCASE("duplicate names are rejected") {
    CHECK_THROWS_AS(create_account(w, AccountName("alice"), newacct,
                                   Permission::single_key("owner", KeyId{"x"}),
                                   Permission::single_key("active", KeyId{"y"}), 3100, 43),
                    sim_error);
  }
  SUBCASE("underfunded ram purchase leaves the world untouched") {
    Hash64 before = world_hash(w);
    CHECK_THROWS_AS(create_account(w, AccountName("alice"), AccountName("poor"),
                                   Permission::single_key("owner", KeyId{"x"}),
                                   Permission::single_key("active", KeyId{"y"}), 2000, 44),
                    sim_error);
    CHECK(world_hash(w) == before);
  }
}

TEST_CASE("world_hash tracks observable state") {
  World w = basic_world();
  Hash64 h0 = world_hash(w);
  CHECK(h0 == world_hash(w));  // stable
  w.account(AccountName("alice")).balances[kCoreSymbol] = 1;
  Hash64 h1 = world_hash(w);
  CHECK(h1 != h0);
  w.resources.stake(AccountName("bob"), 10, ResKind::cpu);
  CHECK(world_hash(w) != h1);
}
