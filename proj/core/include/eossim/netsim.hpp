#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <variant>
#include <vector>

#include "eossim/consensus.hpp"
#include "eossim/contracts.hpp"
#include "eossim/trace.hpp"

namespace eossim {

// Deterministic discrete-event network. Every node owns a full ChainState
// replica; links are FIFO with a fixed per-link latency drawn once from the
// seeded generator. The event queue is totally ordered by (time, sequence).

struct MsgHandshake { BlockNum head = 0; BlockNum lib = 0; Hash64 chain_id = 0; };
struct MsgNotice { BlockNum head = 0; };
struct MsgSyncRequest { BlockNum number = 0; };
struct MsgSignedBlock { Block block; };
struct MsgTxBroadcast { Transaction tx; Ms due = 0; };  // due set for deferred kinds
struct MsgConfirmation { BlockNum number = 0; Hash64 id = 0; AccountName producer; };

using MsgPayload = std::variant<MsgHandshake, MsgNotice, MsgSyncRequest, MsgSignedBlock,
                                MsgTxBroadcast, MsgConfirmation>;
const char* msg_kind_name(const MsgPayload& p);

struct Message {
  int from = -1, to = -1;
  Ms send_time = 0, deliver_time = 0;
  MsgPayload payload;
};

struct ProduceResult {
  Block block;
  Ms processing_ms = 0;  // block work plus filtered-invalid processing
  std::vector<std::pair<Hash64, errc>> rejected;  // pool txs dropped in-block
};

// Builds and commits the block for `slot` on top of `chain`. Immediate pool
// transactions run first (FIFO), then due deferred ones, until the budgets
// are reached; invalid work is filtered, not included. Throws not_your_slot.
ProduceResult produce_block(ChainState& chain, std::deque<Transaction>& pool,
                            const AccountName& producer, std::uint64_t slot,
                            const ProducerSchedule& schedule, const ConsensusParams& params,
                            const ExecEnv& env);

// Replica-side application: verifies linkage (throws bad_linkage), re-executes
// every transaction, drops executed/failed deferred entries, advances head.
void apply_block(ChainState& chain, const Block& b, const ExecEnv& env);

struct Node {
  int id = -1;
  ChainState chain;
  VoteState votes;
  ProducerSchedule schedule;
  bool have_schedule = false;
  ConfirmationTracker tracker;
  std::vector<AccountName> hosted_producers;

  std::deque<Transaction> pool;  // FIFO pending pool
  std::set<Hash64> seen_txs;
  std::set<Hash64> seen_blocks;

  bool syncing = false;
  int sync_peer = -1;
  std::map<int, BlockNum> peer_heads;

  Ms busy_until = 0;
  std::uint64_t last_online_slot = 0;  // latest slot whose owner was expected to produce
  struct Owed { std::uint64_t slot; std::uint64_t parent_slot; };
  std::deque<Owed> backlog;  // slots this node still has to produce

  std::map<AccountName, BlockNum> confirmed_up_to;  // plain mode bookkeeping
  std::map<BlockNum, World> snapshots;  // per-block worlds back to LIB
};

struct SimNet {
  ConsensusParams consensus;
  StepCosts costs;
  Rng rng;
  int drop_per_mille = 0;  // message loss knob, applied at send
  Trace* trace = nullptr;
  Ms now = 0;
  Ms slot_horizon = 0;  // slot timers run while slot_time <= horizon

  std::vector<Node> nodes;
  std::map<std::pair<int, int>, Ms> latency;
  std::set<AccountName> offline_producers;  // scenario faults
  std::map<std::string, std::shared_ptr<const ContractDef>> contract_registry;
  std::function<void(const Block&, int node)> on_block;  // scenario hook
  std::function<void(const Message&)> on_deliver;        // instrumentation hook

  SimNet(ConsensusParams c, StepCosts sc, std::uint64_t seed, Trace* tr)
      : consensus(c), costs(sc), rng(seed), trace(tr) {}

  int add_node();
  void set_link(int a, int b, Ms latency_ms);
  // Installs the same genesis world/votes on every node and starts slot
  // timers (first slot = 1, at t = 500 ms) until `horizon`.
  void genesis(const World& w, Hash64 chain_id, const VoteState& votes, Ms horizon);

  void connect(int node, int peer);  // throws unknown_node
  // Validates and accepts a client transaction at `node`, gossips it.
  // Returns the transaction id. Throws expired / bad_ref_block / auth_failure
  // / mutation_in_read_only.
  Hash64 push_transaction(int node, Transaction tx);

  void schedule_task(Ms t, std::function<void()> fn);
  bool step();               // processes one event; false if queue empty
  void run_until(Ms t_end);  // drains events with t <= t_end

  Node& node(int i);
  const ProducerSchedule& schedule_for(Node& n, std::uint64_t round);

 private:
  struct Event {
    Ms t = 0;
    std::uint64_t seq = 0;
    // 0 = message delivery, 1 = slot timer, 2 = task, 3 = production retry
    int type = 0;
    Message msg;
    int node = -1;
    std::uint64_t slot = 0;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t next_seq_ = 0;

  void push_event(Event e);
  void send(int from, int to, MsgPayload payload);
  void broadcast(int from, MsgPayload payload, int except = -1);
  void deliver(const Message& m);
  void on_slot(int node, std::uint64_t slot);
  void maybe_retally(Node& n, std::uint64_t slot);
  void drain_production(Node& n);
  void do_produce(Node& n, std::uint64_t slot);
  void accept_block(Node& n, const Block& b, int from);
  void record_confirmation(Node& n, BlockNum number, const AccountName& producer);
  void confirm_as_producers(Node& n, const Block& b);
  void advance_lib(Node& n, const std::vector<BlockNum>& newly);
  ExecEnv env_for(Node& n, Ms slot_time) const;
};

}  // namespace eossim
