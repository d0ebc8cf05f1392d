#include "eossim/netsim.hpp"

#include <algorithm>

namespace eossim {

const char* msg_kind_name(const MsgPayload& p) {
  switch (p.index()) {
    case 0: return "handshake";
    case 1: return "notice";
    case 2: return "sync_request";
    case 3: return "signed_block";
    case 4: return "tx_broadcast";
    case 5: return "confirmation";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Block production / application

namespace {

void credit_refunds(World& w, Ms now) {
  for (const auto& r : w.resources.mature_refunds(now))
    w.account(r.account).balances[kCoreSymbol] += r.amount;
}

std::uint64_t slot_in_round(std::uint64_t slot, const ConsensusParams& p) {
  return (slot - 1) % static_cast<std::uint64_t>(p.blocks_per_round());
}

}  // namespace

ProduceResult produce_block(ChainState& chain, std::deque<Transaction>& pool,
                            const AccountName& producer, std::uint64_t slot,
                            const ProducerSchedule& schedule, const ConsensusParams& params,
                            const ExecEnv& env) {
  require(slot_producer(schedule, params, slot_in_round(slot, params)) == producer,
          errc::not_your_slot, producer.value + " at slot " + std::to_string(slot));
  Ms slot_time = static_cast<Ms>(slot) * params.block_interval;
  require(chain.head_timestamp() < slot_time, errc::not_your_slot,
          "slot " + std::to_string(slot) + " already filled");

  ProduceResult res;
  Block& b = res.block;
  b.number = chain.head + 1;
  b.timestamp = slot_time;
  b.producer = producer;
  b.previous_id = chain.head_id();

  credit_refunds(chain.world, slot_time);

  // Deferred transactions spawned inside this block become eligible from the
  // next block on; staged here so a recursion bomb cannot spin in one slot.
  std::vector<std::pair<Ms, Transaction>> staged;
  std::size_t failed_count = 0;

  auto over_budget = [&] {
    return b.cpu_used >= params.cpu_budget || b.net_used >= params.net_budget;
  };

  // 1. immediate pool, FIFO
  while (!pool.empty() && !over_budget()) {
    Transaction tx = std::move(pool.front());
    pool.pop_front();
    Hash64 id = transaction_id(tx);
    if (tx.expiration < slot_time) {
      res.rejected.emplace_back(id, errc::expired);
      continue;
    }
    ExecResult r = apply_transaction(chain.world, tx, env);
    if (!r.ok) {
      res.rejected.emplace_back(id, r.error);
      continue;
    }
    b.cpu_used += r.cpu_ms;
    b.net_used += r.net_words;
    for (auto& d : r.spawned_deferred)
      staged.emplace_back(slot_time + d.deferred->delay, std::move(d));
    b.transactions.push_back(std::move(tx));
  }
  if (!pool.empty()) b.exhausted = true;

  // 2. due deferred transactions; invalid ones are filtered out of the block
  // but each still costs the producer processing time, outside the budget.
  while (auto due = chain.deferred_queue.peek_due(slot_time)) {
    if (over_budget()) {
      b.exhausted = true;
      break;
    }
    Transaction tx = due->second;
    Hash64 id = transaction_id(tx);
    chain.deferred_queue.pop_front();
    if (tx.expiration < slot_time) {
      b.failed_deferred.push_back(id);
      ++failed_count;
      continue;
    }
    ExecResult r = apply_transaction(chain.world, tx, env);
    if (!r.ok) {
      b.failed_deferred.push_back(id);
      ++failed_count;
      continue;
    }
    b.cpu_used += r.cpu_ms;
    b.net_used += r.net_words;
    for (auto& d : r.spawned_deferred)
      staged.emplace_back(slot_time + d.deferred->delay, std::move(d));
    b.transactions.push_back(std::move(tx));
  }

  for (auto& [at, tx] : staged) chain.deferred_queue.push(at, tx);

  chain.blocks.push_back(b);
  chain.head = b.number;
  res.processing_ms = b.cpu_used + static_cast<Ms>(failed_count) * env.costs->failed_deferred;
  return res;
}

void apply_block(ChainState& chain, const Block& b, const ExecEnv& env) {
  require(b.number == chain.head + 1 && b.previous_id == chain.head_id(), errc::bad_linkage,
          "block " + std::to_string(b.number) + " on head " + std::to_string(chain.head));

  credit_refunds(chain.world, b.timestamp);

  std::vector<std::pair<Ms, Transaction>> staged;
  for (const auto& tx : b.transactions) {
    Hash64 id = transaction_id(tx);
    if (tx.is_deferred()) chain.deferred_queue.erase_id(id);
    ExecResult r = apply_transaction(chain.world, tx, env);
    if (!r.ok)
      fail(r.error, "replica rejects tx in block " + std::to_string(b.number) + ": " +
                        r.error_msg);
    for (auto& d : r.spawned_deferred)
      staged.emplace_back(b.timestamp + d.deferred->delay, std::move(d));
  }
  for (Hash64 id : b.failed_deferred) chain.deferred_queue.erase_id(id);
  for (auto& [at, tx] : staged) chain.deferred_queue.push(at, tx);

  chain.blocks.push_back(b);
  chain.head = b.number;
}

// ---------------------------------------------------------------------------
// SimNet

int SimNet::add_node() {
  Node n;
  n.id = static_cast<int>(nodes.size());
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

Node& SimNet::node(int i) {
  require(i >= 0 && i < static_cast<int>(nodes.size()), errc::unknown_node, std::to_string(i));
  return nodes[i];
}

void SimNet::set_link(int a, int b, Ms latency_ms) {
  node(a);
  node(b);
  require(a != b, errc::unknown_node, "self link");
  latency[{a, b}] = latency_ms;
  latency[{b, a}] = latency_ms;
}

void SimNet::genesis(const World& w, Hash64 chain_id, const VoteState& votes, Ms horizon) {
  slot_horizon = horizon;
  for (auto& n : nodes) {
    n.chain.chain_id = chain_id;
    n.chain.world = w;
    n.chain.lib_world = w;
    n.votes = votes;
    n.schedule = tally_votes(n.votes, consensus, 0);
    n.have_schedule = true;
  }
  if (trace) {
    json producers = json::array();
    for (const auto& p : nodes[0].schedule.producers) producers.push_back(p.value);
    trace->emit(0, "schedule", {{"round", 0}, {"producers", producers}});
  }
  if (consensus.block_interval <= horizon) {
    Event e;
    e.type = 1;
    e.t = consensus.block_interval;
    e.slot = 1;
    push_event(e);
  }
}

void SimNet::connect(int n, int peer) {
  node(n);
  node(peer);
  require(latency.count({n, peer}), errc::unknown_node,
          "no link " + std::to_string(n) + "-" + std::to_string(peer));
  MsgHandshake h;
  h.head = nodes[n].chain.head;
  h.lib = nodes[n].chain.last_irreversible;
  h.chain_id = nodes[n].chain.chain_id;
  send(n, peer, h);
}

Hash64 SimNet::push_transaction(int node_id, Transaction tx) {
  Node& n = node(node_id);
  require(n.chain.read_mode != ReadMode::read_only, errc::mutation_in_read_only,
          "node " + std::to_string(node_id));
  require(tx.expiration > now, errc::expired,
          "expired at " + std::to_string(tx.expiration) + ", now " + std::to_string(now));
  require(tx.ref_block_num <= n.chain.head &&
              (tx.ref_block_num == 0 || n.chain.find_block(tx.ref_block_num) != nullptr),
          errc::bad_ref_block, std::to_string(tx.ref_block_num));
  // code origin is an execution-side credential; clients cannot claim it
  require(!tx.origin_code, errc::auth_failure, "client transaction with code origin");
  for (const auto& a : tx.actions)
    for (const auto& auth : a.authorizations)
      require(satisfy_permission(n.chain.world, auth.actor, auth.permission, tx.signers),
              errc::auth_failure, auth.actor.value + "@" + auth.permission);

  Hash64 id = transaction_id(tx);
  Ms due = 0;
  n.seen_txs.insert(id);
  if (tx.is_deferred()) {
    due = now + tx.deferred->delay;
    n.chain.deferred_queue.push(due, tx);
  } else {
    n.pool.push_back(tx);
  }
  if (trace)
    trace->emit(now, "tx_submitted",
                {{"id", id}, {"node", node_id}, {"deferred", tx.is_deferred()}});
  broadcast(node_id, MsgTxBroadcast{std::move(tx), due});
  return id;
}

void SimNet::schedule_task(Ms t, std::function<void()> fn) {
  Event e;
  e.type = 2;
  e.t = std::max(t, now);
  e.fn = std::move(fn);
  push_event(e);
}

void SimNet::push_event(Event e) {
  e.seq = next_seq_++;
  queue_.push(std::move(e));
}

void SimNet::send(int from, int to, MsgPayload payload) {
  auto it = latency.find({from, to});
  if (it == latency.end()) return;  // no link, silently dropped
  if (drop_per_mille > 0 && rng.uniform(1, 1000) <= drop_per_mille) {
    if (trace)
      trace->emit(now, "msg_dropped",
                  {{"from", from}, {"to", to}, {"msg", msg_kind_name(payload)}});
    return;
  }
  Event e;
  e.type = 0;
  e.t = now + it->second;
  e.msg = Message{from, to, now, now + it->second, std::move(payload)};
  push_event(e);
}

void SimNet::broadcast(int from, MsgPayload payload, int except) {
  for (const auto& [link, lat] : latency) {
    if (link.first != from || link.second == except) continue;
    send(from, link.second, payload);
  }
}

bool SimNet::step() {
  if (queue_.empty()) return false;
  Event e = queue_.top();
  queue_.pop();
  now = std::max(now, e.t);
  switch (e.type) {
    case 0: deliver(e.msg); break;
    case 1: {
      for (auto& n : nodes) on_slot(n.id, e.slot);
      Ms next_t = static_cast<Ms>(e.slot + 1) * consensus.block_interval;
      if (next_t <= slot_horizon) {
        Event ne;
        ne.type = 1;
        ne.t = next_t;
        ne.slot = e.slot + 1;
        push_event(ne);
      }
      break;
    }
    case 2: e.fn(); break;
    case 3: drain_production(nodes[e.node]); break;
  }
  return true;
}

void SimNet::run_until(Ms t_end) {
  while (!queue_.empty() && queue_.top().t <= t_end) step();
  now = std::max(now, t_end);
}

ExecEnv SimNet::env_for(Node& n, Ms slot_time) const {
  ExecEnv env;
  env.head_num = n.chain.head;
  env.head_timestamp = n.chain.head_timestamp();
  env.now = slot_time;
  env.costs = &costs;
  env.contract_registry = &contract_registry;
  return env;
}

const ProducerSchedule& SimNet::schedule_for(Node& n, std::uint64_t round) {
  if (n.schedule.round_number != round) {
    evict_silent_producers(n.votes, now, kProducerEvictionSilenceMs,
                           n.have_schedule ? &n.schedule.producers : nullptr);
    n.schedule = tally_votes(n.votes, consensus, round);
  }
  return n.schedule;
}

void SimNet::maybe_retally(Node& n, std::uint64_t slot) {
  std::uint64_t round = (slot - 1) / static_cast<std::uint64_t>(consensus.blocks_per_round());
  if (n.schedule.round_number == round) return;
  Ms slot_time = static_cast<Ms>(slot) * consensus.block_interval;
  auto evicted = evict_silent_producers(n.votes, slot_time, kProducerEvictionSilenceMs,
                                        n.have_schedule ? &n.schedule.producers : nullptr);
  n.schedule = tally_votes(n.votes, consensus, round);
  // a new schedule resets confirmation bookkeeping above the LIB
  n.tracker.confirmations.clear();
  if (trace && n.id == 0) {
    for (const auto& ev : evicted)
      trace->emit(now, "producer_evicted", {{"producer", ev.value}, {"round", round}});
    json producers = json::array();
    for (const auto& p : n.schedule.producers) producers.push_back(p.value);
    trace->emit(now, "schedule", {{"round", round}, {"producers", producers}});
  }
}

void SimNet::on_slot(int node_id, std::uint64_t slot) {
  Node& n = nodes[node_id];
  maybe_retally(n, slot);
  const AccountName& owner =
      slot_producer(n.schedule, consensus, slot_in_round(slot, consensus));
  if (offline_producers.count(owner)) return;  // empty slot, timestamp gap
  std::uint64_t parent = n.last_online_slot;
  n.last_online_slot = slot;
  bool hosted = std::find(n.hosted_producers.begin(), n.hosted_producers.end(), owner) !=
                n.hosted_producers.end();
  if (!hosted) return;
  n.backlog.push_back({slot, parent});
  drain_production(n);
}

void SimNet::drain_production(Node& n) {
  while (!n.backlog.empty()) {
    Node::Owed o = n.backlog.front();
    Ms slot_time = static_cast<Ms>(o.slot) * consensus.block_interval;
    std::uint64_t head_slot =
        n.chain.blocks.empty() ? 0 : n.chain.blocks.back().slot();
    if (head_slot >= o.slot) {  // someone else's block landed there; stale
      n.backlog.pop_front();
      continue;
    }
    // wait for the parent block unless a full slot of grace has passed
    bool have_parent = o.parent_slot == 0 || head_slot >= o.parent_slot;
    if (!have_parent && now < slot_time + consensus.block_interval) {
      Event e;
      e.type = 3;
      e.t = slot_time + consensus.block_interval;
      e.node = n.id;
      push_event(e);
      return;
    }
    Ms ready = std::max(slot_time, n.busy_until);
    if (ready > now) {
      Event e;
      e.type = 3;
      e.t = ready;
      e.node = n.id;
      push_event(e);
      return;
    }
    n.backlog.pop_front();
    do_produce(n, o.slot);
  }
}

void SimNet::do_produce(Node& n, std::uint64_t slot) {
  const AccountName& producer =
      slot_producer(n.schedule, consensus, slot_in_round(slot, consensus));
  Ms slot_time = static_cast<Ms>(slot) * consensus.block_interval;
  ExecEnv env = env_for(n, slot_time);
  ProduceResult pr = produce_block(n.chain, n.pool, producer, slot, n.schedule, consensus, env);
  const Block& b = n.chain.blocks.back();
  n.busy_until = now + pr.processing_ms;
  n.snapshots[b.number] = n.chain.world;
  n.seen_blocks.insert(block_id(b));
  n.votes.candidates[producer].last_block_time = b.timestamp;

  if (trace) {
    std::size_t action_count = 0;
    json txs = json::array();
    for (const auto& tx : b.transactions) {
      action_count += tx.actions.size();
      txs.push_back(transaction_id(tx));
    }
    trace->emit(now, "block",
                {{"number", b.number},
                 {"slot", slot},
                 {"producer", producer.value},
                 {"timestamp", b.timestamp},
                 {"produced_at", now},
                 {"tx_count", b.transactions.size()},
                 {"action_count", action_count},
                 {"cpu", b.cpu_used},
                 {"net", b.net_used},
                 {"failed_deferred", b.failed_deferred.size()},
                 {"exhausted", b.exhausted},
                 {"node", n.id},
                 {"txs", txs}});
    for (const auto& [id, code] : pr.rejected)
      trace->emit(now, "tx_rejected", {{"id", id}, {"error", errc_name(code)}});
  }

  record_confirmation(n, b.number, producer);
  if (consensus.bft_mode) confirm_as_producers(n, b);
  if (!consensus.bft_mode) {
    BlockNum from = std::max(n.confirmed_up_to[producer], n.chain.last_irreversible) + 1;
    for (BlockNum k = from; k <= b.number; ++k) record_confirmation(n, k, producer);
    n.confirmed_up_to[producer] = b.number;
  }

  broadcast(n.id, MsgSignedBlock{b});
  if (on_block) on_block(b, n.id);
  drain_production(n);
}

void SimNet::record_confirmation(Node& n, BlockNum number, const AccountName& producer) {
  if (!n.have_schedule || number <= n.chain.last_irreversible) return;
  if (!n.schedule.contains(producer)) return;
  auto newly = n.tracker.confirm(number, producer, n.schedule,
                                 consensus.confirmation_threshold());
  advance_lib(n, newly);
}

void SimNet::confirm_as_producers(Node& n, const Block& b) {
  Hash64 id = block_id(b);
  for (const auto& p : n.hosted_producers) {
    if (p == b.producer || !n.schedule.contains(p)) continue;
    record_confirmation(n, b.number, p);
    broadcast(n.id, MsgConfirmation{b.number, id, p});
  }
}

void SimNet::advance_lib(Node& n, const std::vector<BlockNum>& newly) {
  for (BlockNum num : newly) {
    n.chain.last_irreversible = num;
    auto it = n.snapshots.find(num);
    if (it != n.snapshots.end()) n.chain.lib_world = it->second;
    if (trace && n.id == 0) trace->emit(now, "irreversible", {{"number", num}});
  }
  if (!newly.empty()) {
    // snapshots below the LIB can never be needed again
    auto it = n.snapshots.begin();
    while (it != n.snapshots.end() && it->first < n.chain.last_irreversible)
      it = n.snapshots.erase(it);
  }
}

void SimNet::accept_block(Node& n, const Block& b, int from) {
  Hash64 id = block_id(b);
  if (n.seen_blocks.count(id)) return;
  if (b.number <= n.chain.head) return;  // old news
  if (b.number > n.chain.head + 1) {
    // gap: fall back to the sync protocol
    n.peer_heads[from] = std::max(n.peer_heads[from], b.number);
    if (!n.syncing) {
      n.syncing = true;
      n.sync_peer = from;
      send(n.id, from, MsgSyncRequest{n.chain.head + 1});
    }
    return;
  }
  ExecEnv env = env_for(n, b.timestamp);
  apply_block(n.chain, b, env);
  n.seen_blocks.insert(id);
  // drop local pool copies of everything the block already carried
  std::set<Hash64> included;
  for (const auto& tx : b.transactions) {
    Hash64 tid = transaction_id(tx);
    included.insert(tid);
    n.seen_txs.insert(tid);
  }
  std::erase_if(n.pool, [&](const Transaction& tx) { return included.count(transaction_id(tx)); });
  n.snapshots[b.number] = n.chain.world;
  n.votes.candidates[b.producer].last_block_time = b.timestamp;
  n.last_online_slot = std::max<std::uint64_t>(n.last_online_slot, b.slot());

  record_confirmation(n, b.number, b.producer);
  if (consensus.bft_mode) {
    confirm_as_producers(n, b);
  } else {
    BlockNum start = std::max(n.confirmed_up_to[b.producer], n.chain.last_irreversible) + 1;
    for (BlockNum k = start; k <= b.number; ++k) record_confirmation(n, k, b.producer);
    n.confirmed_up_to[b.producer] = b.number;
  }

  broadcast(n.id, MsgSignedBlock{b}, from);
  if (on_block) on_block(b, n.id);
  drain_production(n);  // a waiting parent may have arrived
}

void SimNet::deliver(const Message& m) {
  if (on_deliver) on_deliver(m);
  Node& n = nodes[m.to];
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MsgHandshake>) {
          if (p.chain_id != n.chain.chain_id) return;  // foreign chain, ignore
          n.peer_heads[m.from] = p.head;
          if (p.head > n.chain.head && !n.syncing) {
            n.syncing = true;
            n.sync_peer = m.from;
            send(n.id, m.from, MsgSyncRequest{n.chain.head + 1});
          } else if (n.chain.head > p.head) {
            send(n.id, m.from, MsgNotice{n.chain.head});
          }
        } else if constexpr (std::is_same_v<T, MsgNotice>) {
          n.peer_heads[m.from] = p.head;
          if (p.head > n.chain.head && !n.syncing) {
            n.syncing = true;
            n.sync_peer = m.from;
            send(n.id, m.from, MsgSyncRequest{n.chain.head + 1});
          }
        } else if constexpr (std::is_same_v<T, MsgSyncRequest>) {
          const Block* blk = n.chain.find_block(p.number);
          if (blk) send(n.id, m.from, MsgSignedBlock{*blk});
        } else if constexpr (std::is_same_v<T, MsgSignedBlock>) {
          accept_block(n, p.block, m.from);
          if (n.syncing && m.from == n.sync_peer) {
            if (n.chain.head < n.peer_heads[n.sync_peer]) {
              send(n.id, n.sync_peer, MsgSyncRequest{n.chain.head + 1});
            } else {
              n.syncing = false;
              n.sync_peer = -1;
            }
          }
        } else if constexpr (std::is_same_v<T, MsgTxBroadcast>) {
          Hash64 id = transaction_id(p.tx);
          if (n.seen_txs.count(id)) return;
          n.seen_txs.insert(id);
          if (p.tx.is_deferred())
            n.chain.deferred_queue.push(p.due, p.tx);
          else
            n.pool.push_back(p.tx);
          broadcast(n.id, m.payload, m.from);
        } else if constexpr (std::is_same_v<T, MsgConfirmation>) {
          record_confirmation(n, p.number, p.producer);
        }
      },
      m.payload);
}

}  // namespace eossim
