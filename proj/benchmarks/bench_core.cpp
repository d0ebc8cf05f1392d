#include <benchmark/benchmark.h>

#include "eossim/consensus.hpp"
#include "eossim/contracts.hpp"
#include "eossim/netsim.hpp"

using namespace eossim;

namespace {

World bench_world() {
  World w;
  auto mk = [&](const std::string& n) {
    Account a;
    a.name = AccountName(n);
    a.permissions.emplace("owner", Permission::single_key("owner", KeyId{"ko." + n}));
    a.permissions.emplace("active", Permission::single_key("active", KeyId{"k." + n}));
    w.accounts.emplace(a.name, std::move(a));
  };
  mk("eosio");
  mk("eosio.token");
  mk("alice");
  mk("bob");
  w.account(AccountName("alice")).balances[kCoreSymbol] = 1'000'000'000;
  w.resources.stake(AccountName("alice"), 1'000'000, ResKind::cpu);
  w.resources.stake(AccountName("alice"), 1'000'000, ResKind::net);
  return w;
}

Transaction transfer_tx(Tokens amount) {
  Transaction tx;
  Action a;
  a.contract = AccountName("eosio.token");
  a.name = "transfer";
  a.payload = {{"from", std::string("alice")},
               {"to", std::string("bob")},
               {"amount", amount},
               {"memo", std::string()}};
  a.authorizations.push_back({AccountName("alice"), "active"});
  tx.actions.push_back(std::move(a));
  tx.expiration = 1'000'000'000;
  tx.signers.insert(KeyId{"k.alice"});
  return tx;
}

void bm_transaction_id(benchmark::State& state) {
  Transaction tx = transfer_tx(100);
  for (auto _ : state) benchmark::DoNotOptimize(transaction_id(tx));
}
BENCHMARK(bm_transaction_id);

void bm_apply_transfer(benchmark::State& state) {
  World w = bench_world();
  StepCosts costs;
  ExecEnv env;
  env.costs = &costs;
  env.now = 0;
  std::int64_t i = 0;
  for (auto _ : state) {
    Transaction tx = transfer_tx(100 + (i++ % 32));
    benchmark::DoNotOptimize(apply_transaction(w, tx, env));
  }
}
BENCHMARK(bm_apply_transfer);

void bm_produce_block(benchmark::State& state) {
  ConsensusParams params;
  params.producer_count = 1;
  StepCosts costs;
  for (auto _ : state) {
    state.PauseTiming();
    ChainState chain;
    chain.world = bench_world();
    ProducerSchedule sched;
    sched.producers = {AccountName("bpa")};
    std::deque<Transaction> pool;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
      pool.push_back(transfer_tx(100 + i));
    ExecEnv env;
    env.costs = &costs;
    env.now = 500;
    state.ResumeTiming();
    benchmark::DoNotOptimize(
        produce_block(chain, pool, AccountName("bpa"), 1, sched, params, env));
  }
}
BENCHMARK(bm_produce_block)->Arg(8)->Arg(32);

void bm_vote_tally(benchmark::State& state) {
  ConsensusParams params;
  VoteState votes;
  for (int i = 0; i < 40; ++i) {
    AccountName n(std::string("bp") + static_cast<char>('a' + i / 26) +
                  static_cast<char>('a' + i % 26));
    votes.register_candidate(n, 0);
    votes.cast_votes(n, 1'000'000 - i, {n});
  }
  for (auto _ : state) benchmark::DoNotOptimize(tally_votes(votes, params, 0));
}
BENCHMARK(bm_vote_tally);

}  // namespace

BENCHMARK_MAIN();
