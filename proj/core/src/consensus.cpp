#include "eossim/consensus.hpp"

#include <algorithm>

namespace eossim {

void VoteState::register_candidate(const AccountName& c, Ms now) {
  auto& st = candidates[c];
  st.registered = true;
  st.last_block_time = now;
}

void VoteState::deregister_candidate(const AccountName& c) {
  auto it = candidates.find(c);
  if (it != candidates.end()) it->second.registered = false;
}

void VoteState::cast_votes(const AccountName& voter, Tokens stake, std::set<AccountName> slate) {
  require(static_cast<int>(slate.size()) <= kVotesPerVoterCap, errc::config_error,
          voter.value + " votes for " + std::to_string(slate.size()) + " candidates");
  voting_stake[voter] = stake;
  votes[voter] = std::move(slate);
}

Tokens VoteState::total_vote_weight(const AccountName& candidate) const {
  Tokens total = 0;
  for (const auto& [voter, slate] : votes)
    if (slate.count(candidate)) total += voting_stake.at(voter);
  return total;
}

bool ProducerSchedule::contains(const AccountName& a) const {
  return std::find(producers.begin(), producers.end(), a) != producers.end();
}

ProducerSchedule tally_votes(const VoteState& votes, const ConsensusParams& params,
                             std::uint64_t round_number) {
  std::vector<std::pair<Tokens, AccountName>> ranked;
  for (const auto& [name, st] : votes.candidates)
    if (st.registered) ranked.emplace_back(votes.total_vote_weight(name), name);
  require(static_cast<int>(ranked.size()) >= params.producer_count, errc::too_few_candidates,
          std::to_string(ranked.size()) + " registered, need " +
              std::to_string(params.producer_count));
  // heaviest first, ties to the lexicographically smaller name
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  ranked.resize(params.producer_count);

  ProducerSchedule s;
  s.round_number = round_number;
  for (auto& [w, n] : ranked) s.producers.push_back(n);
  std::sort(s.producers.begin(), s.producers.end());  // slot order = name order
  return s;
}

const AccountName& slot_producer(const ProducerSchedule& s, const ConsensusParams& params,
                                 std::uint64_t slot_in_round) {
  auto idx = (slot_in_round % static_cast<std::uint64_t>(params.blocks_per_round())) /
             static_cast<std::uint64_t>(params.slots_per_producer);
  return s.producers.at(idx);
}

std::vector<AccountName> evict_silent_producers(VoteState& votes, Ms now, Ms silence_threshold,
                                                const std::vector<AccountName>* scope) {
  std::vector<AccountName> evicted;
  for (auto& [name, st] : votes.candidates) {
    if (scope && std::find(scope->begin(), scope->end(), name) == scope->end()) continue;
    if (st.registered && now - st.last_block_time > silence_threshold) {
      st.registered = false;
      evicted.push_back(name);
    }
  }
  return evicted;
}

std::vector<BlockNum> ConfirmationTracker::confirm(BlockNum number, const AccountName& producer,
                                                   const ProducerSchedule& schedule,
                                                   int threshold) {
  require(schedule.contains(producer), errc::not_a_producer, producer.value);
  if (number <= last_irreversible) return {};  // already final, nothing to do
  confirmations[number].insert(producer);

  std::vector<BlockNum> newly;
  if (static_cast<int>(confirmations[number].size()) >= threshold) {
    for (BlockNum n = last_irreversible + 1; n <= number; ++n) newly.push_back(n);
    last_irreversible = number;
    prune_below(number);
  }
  return newly;
}

void ConfirmationTracker::prune_below(BlockNum n) {
  auto it = confirmations.begin();
  while (it != confirmations.end() && it->first <= n) it = confirmations.erase(it);
}

}  // namespace eossim
