#pragma once

#include <map>
#include <set>
#include <vector>

#include "eossim/chain.hpp"

namespace eossim {

// DPoS voting, 21-producer scheduling in 252-block rounds, BFT confirmation
// bookkeeping and liveness eviction.

constexpr int kVotesPerVoterCap = 30;

struct CandidateState {
  bool registered = false;
  Ms last_block_time = 0;  // timestamp of the candidate's latest block
};

struct VoteState {
  std::map<AccountName, Tokens> voting_stake;                 // per voter
  std::map<AccountName, std::set<AccountName>> votes;         // voter -> candidates
  std::map<AccountName, CandidateState> candidates;

  void register_candidate(const AccountName& c, Ms now);
  void deregister_candidate(const AccountName& c);
  // Replaces the voter's slate; enforces the 30-candidate cap.
  void cast_votes(const AccountName& voter, Tokens stake, std::set<AccountName> slate);
  Tokens total_vote_weight(const AccountName& candidate) const;
};

struct ConsensusParams {
  int producer_count = 21;
  int slots_per_producer = 12;
  Ms block_interval = kBlockIntervalMs;
  Ms cpu_budget = 200;          // per block
  Words net_budget = 100'000;   // per block
  bool bft_mode = true;         // else plain DPoS (confirm at own slot)

  int blocks_per_round() const { return producer_count * slots_per_producer; }
  // more than two-thirds: 21 producers -> 15
  int confirmation_threshold() const { return (2 * producer_count) / 3 + 1; }
};

struct ProducerSchedule {
  std::uint64_t round_number = 0;
  std::vector<AccountName> producers;  // name-sorted slot order

  bool contains(const AccountName& a) const;
};

// Top-N by vote weight, descending, ties broken by lexicographically smaller
// name; slot order within the round is the name-sorted selection. Throws
// too_few_candidates.
ProducerSchedule tally_votes(const VoteState& votes, const ConsensusParams& params,
                             std::uint64_t round_number);

// producer for a 0-based slot index within the schedule's round
const AccountName& slot_producer(const ProducerSchedule& s, const ConsensusParams& params,
                                 std::uint64_t slot_in_round);

// Deregisters every candidate silent for more than the eviction threshold.
// When `scope` is given, only its members are examined, so standbys that were
// never scheduled are not punished for blocks they could not produce.
// Returns the evicted names.
std::vector<AccountName> evict_silent_producers(VoteState& votes, Ms now,
                                                Ms silence_threshold = kProducerEvictionSilenceMs,
                                                const std::vector<AccountName>* scope = nullptr);

// Tracks confirmations and the last irreversible block. Irreversibility is
// monotone; a block needs `threshold` distinct confirmations from schedule
// members (the producer's self-confirmation counts).
struct ConfirmationTracker {
  std::map<BlockNum, std::set<AccountName>> confirmations;
  BlockNum last_irreversible = 0;

  // Returns the new LIB if it advanced (confirming `number` also confirms
  // nothing extra for ancestors; they advance transitively because LIB is
  // the highest block meeting the threshold and all below are kept).
  std::vector<BlockNum> confirm(BlockNum number, const AccountName& producer,
                                const ProducerSchedule& schedule, int threshold);
  void prune_below(BlockNum n);
};

}  // namespace eossim
