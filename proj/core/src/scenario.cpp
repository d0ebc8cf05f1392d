#include "eossim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace eossim {

std::int64_t AttackConfig::get_int(const std::string& key, std::int64_t def) const {
  auto it = params.find(key);
  if (it == params.end()) return def;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    fail(errc::config_error, "attack." + key + ": not an integer: '" + it->second + "'");
  }
}

std::string AttackConfig::get_str(const std::string& key, const std::string& def) const {
  auto it = params.find(key);
  return it == params.end() ? def : it->second;
}

std::vector<AccountName> producer_names(int count) {
  std::vector<AccountName> out;
  for (int i = 0; i < count; ++i) {
    std::string s = "bp";
    int v = i;
    char buf[4];
    for (int j = 3; j >= 0; --j) {
      buf[j] = static_cast<char>('a' + v % 26);
      v /= 26;
    }
    s.append(buf, 4);
    out.emplace_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void serr(int line, const std::string& msg) {
  fail(errc::parse_error, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    std::int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    serr(line, "not an integer: '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    std::uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    serr(line, "not an unsigned integer: '" + v + "'");
  }
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::string& name) {
  ScenarioSpec spec;
  spec.name = name;
  spec.source_text = text;

  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  std::string section;       // "", "topology", "producers", "resources",
                             // "workload", "attack", "account"
  AccountDecl* acct = nullptr;

  while (std::getline(in, raw)) {
    ++ln;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') serr(ln, "unterminated section header");
      std::string head = trim(line.substr(1, line.size() - 2));
      acct = nullptr;
      if (head.rfind("account ", 0) == 0) {
        section = "account";
        std::string aname = trim(head.substr(8));
        try {
          spec.accounts.push_back({AccountName(aname)});
        } catch (const sim_error& e) {
          serr(ln, e.what());
        }
        acct = &spec.accounts.back();
      } else if (head == "topology" || head == "producers" || head == "resources" ||
                 head == "workload" || head == "attack") {
        section = head;
        if (head == "workload" && !spec.workload) spec.workload = WorkloadSpec{};
      } else {
        serr(ln, "unknown section [" + head + "]");
      }
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) serr(ln, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) serr(ln, "empty key");

    try {
      if (section.empty()) {
        if (key == "name") spec.name = val;
        else if (key == "duration") spec.duration = to_int(val, ln);
        else if (key == "seed") spec.seed = to_u64(val, ln);
        else if (key == "read_mode") spec.read_mode = val;
        else serr(ln, "unknown key '" + key + "'");
      } else if (section == "topology") {
        if (key == "nodes") spec.nodes = static_cast<int>(to_int(val, ln));
        else if (key == "latency_min") spec.latency_min = to_int(val, ln);
        else if (key == "latency_max") spec.latency_max = to_int(val, ln);
        else if (key == "drop_per_mille") spec.drop_per_mille = static_cast<int>(to_int(val, ln));
        else serr(ln, "unknown key 'topology." + key + "'");
      } else if (section == "producers") {
        if (key == "count") spec.producer_count = static_cast<int>(to_int(val, ln));
        else if (key == "slots_per_producer")
          spec.slots_per_producer = static_cast<int>(to_int(val, ln));
        else if (key == "stake") spec.producer_stake = to_int(val, ln);
        else if (key == "mode") spec.dpos_mode = val;
        else if (key == "cpu_budget") spec.cpu_budget = to_int(val, ln);
        else if (key == "net_budget") spec.net_budget = to_int(val, ln);
        else if (key == "offline") {
          std::istringstream vs(val);
          std::string p;
          while (vs >> p) spec.offline.emplace_back(p);
        } else serr(ln, "unknown key 'producers." + key + "'");
      } else if (section == "resources") {
        if (key == "ram_price") spec.resources.ram_price = to_int(val, ln);
        else if (key == "total_ram_supply") spec.resources.total_ram_supply = to_int(val, ln);
        else if (key == "window_cpu_capacity")
          spec.resources.window_cpu_capacity = to_int(val, ln);
        else if (key == "window_net_capacity")
          spec.resources.window_net_capacity = to_int(val, ln);
        else if (key == "window_length") spec.resources.window_length = to_int(val, ln);
        else serr(ln, "unknown key 'resources." + key + "'");
      } else if (section == "account") {
        if (key == "balance") acct->balance = to_int(val, ln);
        else if (key == "stake_cpu") acct->stake_cpu = to_int(val, ln);
        else if (key == "stake_net") acct->stake_net = to_int(val, ln);
        else if (key == "ram") acct->ram_purchase = to_int(val, ln);
        else if (key == "contract") acct->contract = val;
        else if (key == "node") acct->node = static_cast<int>(to_int(val, ln));
        else serr(ln, "unknown key 'account." + key + "'");
      } else if (section == "workload") {
        auto& w = *spec.workload;
        if (key == "rate_centi") w.tx_rate_centi = to_int(val, ln);
        else if (key == "sender") w.sender = AccountName(val);
        else if (key == "receiver") w.receiver = AccountName(val);
        else if (key == "amount") w.amount = to_int(val, ln);
        else if (key == "start") w.start = to_int(val, ln);
        else if (key == "stop") w.stop = to_int(val, ln);
        else serr(ln, "unknown key 'workload." + key + "'");
      } else if (section == "attack") {
        if (key == "kind") spec.attack.kind = val;
        else spec.attack.params[key] = val;
      }
    } catch (const sim_error& e) {
      if (e.code == errc::parse_error) throw;
      serr(ln, e.what());
    }
  }

  // semantic validation, with key paths
  auto cfg = [](bool ok, const std::string& path, const std::string& msg) {
    require(ok, errc::config_error, path + ": " + msg);
  };
  cfg(spec.duration > 0, "duration", "must be positive");
  cfg(spec.nodes >= 1, "topology.nodes", "need at least one node");
  cfg(spec.latency_min >= 0 && spec.latency_min <= spec.latency_max, "topology.latency_min",
      "need 0 <= latency_min <= latency_max");
  cfg(spec.drop_per_mille >= 0 && spec.drop_per_mille < 1000, "topology.drop_per_mille",
      "must be in [0, 1000)");
  cfg(spec.producer_count >= 1, "producers.count", "need at least one producer");
  cfg(spec.slots_per_producer >= 1, "producers.slots_per_producer", "must be positive");
  cfg(spec.dpos_mode == "bft" || spec.dpos_mode == "plain", "producers.mode",
      "must be 'bft' or 'plain'");
  cfg(spec.cpu_budget > 0, "producers.cpu_budget", "must be positive");
  cfg(spec.net_budget > 0, "producers.net_budget", "must be positive");
  cfg(spec.read_mode == "speculative" || spec.read_mode == "head" ||
          spec.read_mode == "read_only" || spec.read_mode == "irreversible",
      "read_mode", "unknown mode '" + spec.read_mode + "'");

  std::set<AccountName> declared;
  for (const auto& a : spec.accounts) {
    cfg(declared.insert(a.name).second, "account " + a.name.value, "declared twice");
    cfg(a.node >= 0 && a.node < spec.nodes, "account " + a.name.value + ".node",
        "node " + std::to_string(a.node) + " out of range");
    cfg(a.balance >= 0, "account " + a.name.value + ".balance", "negative");
    cfg(a.stake_cpu + a.stake_net + a.ram_purchase <= a.balance,
        "account " + a.name.value + ".balance",
        "stake plus ram purchase exceeds balance");
  }
  if (spec.workload) {
    const auto& w = *spec.workload;
    cfg(w.tx_rate_centi > 0, "workload.rate_centi", "must be positive");
    cfg(declared.count(w.sender), "workload.sender", "unknown account '" + w.sender.value + "'");
    cfg(declared.count(w.receiver), "workload.receiver",
        "unknown account '" + w.receiver.value + "'");
    cfg(w.start >= 0, "workload.start", "negative");
  }
  static const std::set<std::string> kKnownAttacks = {
      "none",        "block_delay",  "cpu_exhaustion", "ram_exhaustion",
      "ramsomware",  "fake_eos",     "fake_notification", "roll_random"};
  cfg(kKnownAttacks.count(spec.attack.kind), "attack.kind",
      "unknown attack '" + spec.attack.kind + "'");
  return spec;
}

ScenarioSpec parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_error, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  if (dot != std::string::npos) base = base.substr(0, dot);
  return parse_scenario(ss.str(), base);
}

// ---------------------------------------------------------------------------
// Running

namespace {

constexpr int kStandbyProducers = 3;

KeyId key_of(const AccountName& a) { return KeyId{"k." + a.value}; }

std::shared_ptr<const ContractDef> load_contract(SimNet& net, const std::string& dir,
                                                 const std::string& name) {
  auto it = net.contract_registry.find(name);
  if (it != net.contract_registry.end()) return it->second;
  auto def = std::make_shared<const ContractDef>(parse_contract_file(dir + "/" + name + ".ctr"));
  net.contract_registry[name] = def;
  return def;
}

struct Pusher {
  SimNet& net;
  Trace& tr;

  void push(int node, const AccountName& actor, const AccountName& contract,
            const std::string& action, Payload payload, Ms delay = -1,
            const AccountName* sponsor = nullptr) {
    Transaction tx;
    Action a;
    a.contract = contract;
    a.name = action;
    a.payload = std::move(payload);
    a.authorizations.push_back({actor, "active"});
    tx.actions.push_back(std::move(a));
    tx.ref_block_num = net.node(node).chain.head;
    tx.expiration = net.now + 30'000;
    if (delay >= 0) tx.deferred = Deferred{delay, sponsor ? *sponsor : actor};
    tx.signers.insert(key_of(actor));
    try {
      net.push_transaction(node, std::move(tx));
    } catch (const sim_error& e) {
      tr.emit(net.now, "push_failed",
              {{"actor", actor.value}, {"action", action}, {"error", errc_name(e.code)}});
    }
  }

  void transfer(int node, const AccountName& from, const AccountName& to, Tokens amount) {
    push(node, from, AccountName("eosio.token"), "transfer",
         {{"from", from.value}, {"to", to.value}, {"amount", amount}, {"memo", std::string()}});
  }
};

int home_node(const ScenarioSpec& spec, const AccountName& a) {
  for (const auto& d : spec.accounts)
    if (d.name == a) return d.node;
  return 0;
}

void schedule_attack(SimNet& net, Trace& tr, const ScenarioSpec& spec, Pusher& push) {
  const AttackConfig& atk = spec.attack;
  if (!atk.enabled()) return;
  AccountName attacker(atk.get_str("attacker", "mallory"));
  int anode = home_node(spec, attacker);
  Ms start = atk.get_int("start", 1'000);
  Ms stop = atk.get_int("stop", spec.duration);
  Ms interval = atk.get_int("interval", 500);

  if (atk.kind == "block_delay") {
    // seed deferred spam on the attacker's own contract, then swap the code
    // out so every queued job fails at the producer
    int seeds = static_cast<int>(atk.get_int("seeds", 4));
    Ms swap_at = atk.get_int("swap_at", start + 2'000);
    for (int i = 0; i < seeds; ++i) {
      net.schedule_task(start + i * 100, [&push, anode, attacker, i] {
        push.push(anode, attacker, attacker, "spam",
                  {{"seq", static_cast<std::int64_t>(i)}});
      });
    }
    net.schedule_task(swap_at, [&push, anode, attacker] {
      push.push(anode, attacker, AccountName("eosio"), "setcode",
                {{"account", attacker.value}, {"code", std::string()}});
    });
  } else if (atk.kind == "cpu_exhaustion") {
    // every poke makes the sponsoring victim contract burn its own CPU
    AccountName target(atk.get_str("target", "victimdapp"));
    for (Ms t = start; t < stop; t += interval) {
      net.schedule_task(t, [&push, anode, attacker, target] {
        push.push(anode, attacker, target, "poke", {{"who", attacker.value}});
      });
    }
  } else if (atk.kind == "ram_exhaustion") {
    AccountName target(atk.get_str("target", "pinboard"));
    std::int64_t i = 0;
    for (Ms t = start; t < stop; t += interval, ++i) {
      net.schedule_task(t, [&push, anode, attacker, target, i] {
        push.push(anode, attacker, target, "post",
                  {{"who", attacker.value}, {"key", i}});
      });
    }
  } else if (atk.kind == "ramsomware") {
    // victim delegates to a helper contract; the attacker later swaps the
    // helper's code for a drain and sweeps the victim's balance
    AccountName victim(atk.get_str("victim", "naive"));
    AccountName helper(atk.get_str("helper", "helper"));
    std::string drain = atk.get_str("drain_contract", "drain");
    Tokens amount = atk.get_int("amount", 100'000);
    int vnode = home_node(spec, victim);
    int hnode = home_node(spec, helper);
    if (atk.get_int("grant", 1)) {
      net.schedule_task(start, [&push, vnode, victim, helper] {
        push.push(vnode, victim, AccountName("eosio"), "grantcode",
                  {{"account", victim.value}, {"code_account", helper.value}});
      });
    }
    // the helper account belongs to the attacker, so its key signs the swap
    net.schedule_task(start + 2'000, [&push, hnode, helper, drain] {
      push.push(hnode, helper, AccountName("eosio"), "setcode",
                {{"account", helper.value}, {"code", drain}});
    });
    net.schedule_task(start + 4'000, [&push, anode, attacker, helper, victim, amount] {
      push.push(anode, attacker, helper, "sweep",
                {{"victim", victim.value}, {"to", attacker.value}, {"amount", amount}});
    });
  } else if (atk.kind == "fake_eos") {
    // "transfer" on the attacker's token contract notifies the victim dapp,
    // which pays out real EOS if it never checks the code account
    AccountName faketoken(atk.get_str("token", "faketoken"));
    AccountName target(atk.get_str("target", "doubler"));
    Tokens amount = atk.get_int("amount", 100'000);
    for (Ms t = start; t < stop; t += interval) {
      net.schedule_task(t, [&push, anode, attacker, faketoken, target, amount] {
        push.push(anode, attacker, faketoken, "transfer",
                  {{"from", attacker.value},
                   {"to", target.value},
                   {"amount", amount},
                   {"memo", std::string("deposit")}});
      });
    }
  } else if (atk.kind == "fake_notification") {
    // a real transfer between the attacker's own accounts; the second account
    // relays the genuine eosio.token notification to the victim
    AccountName accomplice(atk.get_str("accomplice", "mallory2"));
    Tokens amount = atk.get_int("amount", 100'000);
    for (Ms t = start; t < stop; t += interval) {
      net.schedule_task(t, [&push, anode, attacker, accomplice, amount] {
        push.transfer(anode, attacker, accomplice, amount);
      });
    }
  } else if (atk.kind == "roll_random") {
    // bet only when the precomputed mix is a winner
    AccountName target(atk.get_str("target", "gamble"));
    Tokens wager = atk.get_int("wager", 50'000);
    std::int64_t threshold = atk.get_int("threshold", 48);
    for (Ms t = start; t < stop; t += interval) {
      net.schedule_task(t, [&net, &push, &tr, anode, attacker, target, wager, threshold] {
        Node& n = net.node(anode);
        std::int64_t mix =
            block_info_mix(n.chain.head, n.chain.head_timestamp(), n.chain.head);
        tr.emit(net.now, "roll_predicted", {{"mix", mix}, {"bet", mix < threshold}});
        if (mix >= threshold) return;
        push.push(anode, attacker, target, "bet",
                  {{"player", attacker.value}, {"wager", wager}});
      });
    }
  }
}

}  // namespace

Trace run_scenario(const ScenarioSpec& spec, const std::string& contract_dir) {
  Trace tr;
  tr.scenario = spec.name;
  tr.seed = spec.seed;
  tr.scenario_text = spec.source_text;

  ConsensusParams params;
  params.producer_count = spec.producer_count;
  params.slots_per_producer = spec.slots_per_producer;
  params.cpu_budget = spec.cpu_budget;
  params.net_budget = spec.net_budget;
  params.bft_mode = spec.dpos_mode == "bft";

  StepCosts costs;
  SimNet net(params, costs, spec.seed, &tr);
  net.drop_per_mille = spec.drop_per_mille;

  for (int i = 0; i < spec.nodes; ++i) net.add_node();
  for (int i = 0; i < spec.nodes; ++i)
    for (int j = i + 1; j < spec.nodes; ++j)
      net.set_link(i, j, net.rng.uniform(spec.latency_min, spec.latency_max));

  ReadMode rm = spec.read_mode == "speculative"   ? ReadMode::speculative
                : spec.read_mode == "read_only"   ? ReadMode::read_only
                : spec.read_mode == "irreversible" ? ReadMode::irreversible
                                                   : ReadMode::head;
  for (int i = 0; i < spec.nodes; ++i) net.node(i).chain.read_mode = rm;

  // --- genesis world
  World w;
  w.resources.params = spec.resources;
  auto boot = [&](const std::string& name) {
    AccountName an(name);
    Account a;
    a.name = an;
    a.creator = an;
    a.permissions.emplace("owner", Permission::single_key("owner", key_of(an)));
    a.permissions.emplace("active", Permission::single_key("active", key_of(an)));
    w.accounts.emplace(an, std::move(a));
  };
  boot("eosio");
  boot("eosio.token");
  w.account(AccountName("eosio")).balances[kCoreSymbol] = 10'000'000'000'0000LL;

  VoteState votes;
  auto candidates = producer_names(spec.producer_count + kStandbyProducers);
  Tokens creation_ram = kAccountRamFootprint + 100;  // covers footprint plus the trade fee
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& p = candidates[i];
    create_account(w, AccountName("eosio"), p, Permission::single_key("owner", key_of(p)),
                   Permission::single_key("active", key_of(p)), creation_ram, 0);
    // strictly decreasing weights: the first producer_count names get slots,
    // the rest are standbys that enter after an eviction
    Tokens stake = spec.producer_stake - static_cast<Tokens>(i);
    votes.register_candidate(p, 0);
    votes.cast_votes(p, stake, {p});
  }

  for (const auto& d : spec.accounts) {
    create_account(w, AccountName("eosio"), d.name,
                   Permission::single_key("owner", key_of(d.name)),
                   Permission::single_key("active", key_of(d.name)),
                   creation_ram + d.ram_purchase, 0);
    if (d.balance > 0) w.account(d.name).balances[kCoreSymbol] = d.balance;
    auto& acct = w.account(d.name);
    if (d.stake_cpu > 0) {
      acct.balances[kCoreSymbol] -= d.stake_cpu;
      w.resources.stake(d.name, d.stake_cpu, ResKind::cpu);
    }
    if (d.stake_net > 0) {
      acct.balances[kCoreSymbol] -= d.stake_net;
      w.resources.stake(d.name, d.stake_net, ResKind::net);
    }
    if (!d.contract.empty())
      set_code(w, d.name, load_contract(net, contract_dir, d.contract));
  }
  // attacks may swap in contracts that no account starts with
  for (const auto& [k, v] : spec.attack.params)
    if (k.rfind("preload", 0) == 0) load_contract(net, contract_dir, v);

  for (std::size_t i = 0; i < candidates.size(); ++i)
    net.node(static_cast<int>(i) % spec.nodes).hosted_producers.push_back(candidates[i]);
  for (const auto& off : spec.offline) net.offline_producers.insert(off);

  Hash64 chain_id = fnv1a64(spec.name + "/" + std::to_string(spec.seed));
  net.genesis(w, chain_id, votes, spec.duration);
  for (int i = 0; i < spec.nodes; ++i)
    for (int j = i + 1; j < spec.nodes; ++j) net.connect(i, j);

  Pusher push{net, tr};

  if (spec.workload) {
    const auto& wl = *spec.workload;
    Ms stop = wl.stop < 0 ? spec.duration : wl.stop;
    int node = home_node(spec, wl.sender);
    for (std::int64_t k = 0;; ++k) {
      Ms t = wl.start + k * 100'000 / wl.tx_rate_centi;
      if (t >= stop) break;
      net.schedule_task(t, [&push, node, wl] {
        push.transfer(node, wl.sender, wl.receiver, wl.amount);
      });
    }
  }

  schedule_attack(net, tr, spec, push);

  net.run_until(spec.duration);

  // end-of-run state snapshot (node 0), for exploit-delta assertions
  const World& fin = net.node(0).chain.world;
  for (const auto& [name, acct] : fin.accounts)
    tr.emit(spec.duration, "balance",
            {{"account", name.value}, {"amount", acct.balance(kCoreSymbol)}});
  for (const auto& [name, r] : fin.resources.accounts)
    tr.emit(spec.duration, "resources",
            {{"account", name.value},
             {"staked_cpu", r.staked_cpu},
             {"staked_net", r.staked_net},
             {"cpu_used", r.cpu_used},
             {"net_used", r.net_used},
             {"ram_owned", r.ram_owned},
             {"ram_used", r.ram_used}});
  tr.emit(spec.duration, "end",
          {{"head", net.node(0).chain.head},
           {"lib", net.node(0).chain.last_irreversible},
           {"world", world_hash(fin)}});
  return tr;
}

std::int64_t replay_trace(const Trace& golden, const std::string& contract_dir) {
  ScenarioSpec spec = parse_scenario(golden.scenario_text, golden.scenario);
  spec.seed = golden.seed;
  Trace fresh = run_scenario(spec, contract_dir);
  std::size_t n = std::min(golden.events.size(), fresh.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = golden.events[i];
    const auto& b = fresh.events[i];
    if (a.t != b.t || a.kind != b.kind || a.fields.dump() != b.fields.dump())
      return static_cast<std::int64_t>(i);
  }
  if (golden.events.size() != fresh.events.size()) return static_cast<std::int64_t>(n);
  return -1;
}

}  // namespace eossim
