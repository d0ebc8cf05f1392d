#include <doctest.h>

#include "eossim/resources.hpp"

using namespace eossim;

namespace {
const AccountName kAlice("alice");
const AccountName kBob("bob");
const AccountName kCarol("carol");
}  // namespace

TEST_CASE("cpu and net limits are pro rata to stake, floored") {
  ResourceLedger led;
  led.params.window_cpu_capacity = 10'000;
  led.params.window_net_capacity = 1'000'000;
  led.stake(kAlice, 300, ResKind::cpu);
  led.stake(kBob, 700, ResKind::cpu);
  CHECK(led.cpu_limit(kAlice) == 3'000);
  CHECK(led.cpu_limit(kBob) == 7'000);

  led.stake(kAlice, 1, ResKind::net);
  led.stake(kBob, 1, ResKind::net);
  led.stake(kCarol, 1, ResKind::net);
  // 1000000 / 3 floors to 333333 each; the remainder is nobody's
  CHECK(led.net_limit(kAlice) == 333'333);
  CHECK(led.net_limit(kBob) == 333'333);
  CHECK(led.net_limit(kCarol) == 333'333);

  CHECK(led.cpu_limit(kCarol) == 0);  // no cpu stake, no cpu
}

TEST_CASE("limit floors never overshoot capacity") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    ResourceLedger led;
    led.params.window_cpu_capacity = 10'000;
    int n = static_cast<int>(rng.uniform(1, 9));
    std::vector<AccountName> names;
    for (int i = 0; i < n; ++i) {
      AccountName a(std::string("acct") + static_cast<char>('a' + i));
      names.push_back(a);
      led.stake(a, rng.uniform(1, 1'000'000), ResKind::cpu);
    }
    Ms sum = 0;
    for (const auto& a : names) sum += led.cpu_limit(a);
    CHECK(sum <= led.params.window_cpu_capacity);
    CHECK(sum >= led.params.window_cpu_capacity - n);  // floors lose < 1 each
  }
}

TEST_CASE("consumption is blocked at the limit and resets at window edges") {
  ResourceLedger led;
  led.params.window_cpu_capacity = 1'000;
  led.params.window_length = 1'000'000;
  led.stake(kAlice, 1, ResKind::cpu);
  led.stake(kAlice, 1, ResKind::net);

  led.consume(kAlice, 900, 0, 10);
  CHECK_THROWS_AS(led.consume(kAlice, 200, 0, 20), sim_error);
  led.consume(kAlice, 100, 0, 30);  // exactly at the limit is fine
  CHECK_THROWS_AS(led.consume(kAlice, 1, 0, 40), sim_error);
  CHECK(!led.can_consume(kAlice, 1, 0, 40));

  // next window: full allowance again
  CHECK(led.can_consume(kAlice, 1'000, 0, 1'000'000));
  led.consume(kAlice, 1'000, 0, 1'000'000);
  CHECK_THROWS_AS(led.consume(kAlice, 1, 0, 1'500'000), sim_error);
}

TEST_CASE("net is metered independently of cpu") {
  ResourceLedger led;
  led.params.window_net_capacity = 100;
  led.stake(kAlice, 1, ResKind::net);
  led.stake(kAlice, 1, ResKind::cpu);
  led.consume(kAlice, 0, 100, 0);
  CHECK_THROWS_AS(led.consume(kAlice, 0, 1, 0), sim_error);
  led.consume(kAlice, 1, 0, 0);  // cpu unaffected
}

TEST_CASE("zero stake means zero allowance") {
  ResourceLedger led;
  led.stake(kBob, 100, ResKind::cpu);
  CHECK_THROWS_AS(led.consume(kAlice, 1, 0, 0), sim_error);
}

TEST_CASE("ram buy and sell burn the 0.5% fee, floored") {
  ResourceLedger led;
  led.params.ram_price = 1;
  Bytes got = led.buy_ram(kAlice, 10'000);
  CHECK(got == 9'950);            // fee floor(10000*0.005) = 50
  CHECK(led.fees_burned == 50);
  CHECK(led.ram_sold == 9'950);

  // tiny purchase: fee floors to zero
  CHECK(led.buy_ram(kBob, 199) == 199);
  CHECK(led.fees_burned == 50);

  Tokens back = led.sell_ram(kAlice, 9'950);
  CHECK(back == 9'950 - 49);      // fee floor(9950*0.005) = 49
  CHECK(led.fees_burned == 99);
  CHECK(led.ram_sold == 199);
}

TEST_CASE("ram in use cannot be sold and never replenishes") {
  ResourceLedger led;
  led.buy_ram(kAlice, 1'000);  // 995 bytes
  led.use_ram(kAlice, 900);
  CHECK_THROWS_AS(led.sell_ram(kAlice, 200), sim_error);
  CHECK(led.sell_ram(kAlice, 95) == 95);
  // time passing changes nothing for ram
  CHECK_THROWS_AS(led.use_ram(kAlice, 1), sim_error);
  led.release_ram(kAlice, 900);
  led.use_ram(kAlice, 900);
}

TEST_CASE("ram supply is finite") {
  ResourceLedger led;
  led.params.total_ram_supply = 1'000;
  led.buy_ram(kAlice, 1'000);  // 995 bytes
  CHECK_THROWS_AS(led.buy_ram(kBob, 100), sim_error);
  CHECK(led.buy_ram(kBob, 5) == 5);
}

TEST_CASE("unstake locks tokens for exactly three days") {
  ResourceLedger led;
  led.stake(kAlice, 1'000, ResKind::cpu);
  led.unstake(kAlice, 400, ResKind::cpu, 5'000);
  CHECK(led.acct(kAlice).staked_cpu == 600);
  CHECK(led.total_staked_cpu == 600);

  CHECK(led.mature_refunds(5'000 + kUnstakeLockMs - 1).empty());
  auto due = led.mature_refunds(5'000 + kUnstakeLockMs);
  REQUIRE(due.size() == 1);
  CHECK(due[0].account == kAlice);
  CHECK(due[0].amount == 400);
  CHECK(led.mature_refunds(5'000 + kUnstakeLockMs).empty());  // one-shot

  CHECK_THROWS_AS(led.unstake(kAlice, 601, ResKind::cpu, 6'000), sim_error);
  CHECK_THROWS_AS(led.unstake(kAlice, 0, ResKind::cpu, 6'000), sim_error);
}

TEST_CASE("unstaking shrinks the limit immediately") {
  ResourceLedger led;
  led.params.window_cpu_capacity = 1'000;
  led.stake(kAlice, 500, ResKind::cpu);
  led.stake(kBob, 500, ResKind::cpu);
  CHECK(led.cpu_limit(kAlice) == 500);
  led.unstake(kAlice, 250, ResKind::cpu, 0);
  CHECK(led.cpu_limit(kAlice) == 333);  // 1000 * 250 / 750
  CHECK(led.cpu_limit(kBob) == 666);
}
