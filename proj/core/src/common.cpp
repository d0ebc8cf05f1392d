#include "eossim/common.hpp"

namespace eossim {

const char* errc_name(errc e) {
  switch (e) {
    case errc::ok: return "Ok";
    case errc::name_taken: return "NameTaken";
    case errc::invalid_name: return "InvalidName";
    case errc::insufficient_balance: return "InsufficientBalance";
    case errc::insufficient_ram: return "InsufficientRam";
    case errc::unknown_account: return "UnknownAccount";
    case errc::unknown_permission: return "UnknownPermission";
    case errc::recursion_depth_exceeded: return "RecursionDepthExceeded";
    case errc::unsatisfiable_permission: return "UnsatisfiablePermission";
    case errc::expired: return "Expired";
    case errc::bad_ref_block: return "BadRefBlock";
    case errc::auth_failure: return "AuthFailure";
    case errc::mutation_in_read_only: return "MutationInReadOnly";
    case errc::zero_amount: return "ZeroAmount";
    case errc::insufficient_stake: return "InsufficientStake";
    case errc::ram_supply_exhausted: return "RamSupplyExhausted";
    case errc::ram_in_use: return "RamInUse";
    case errc::cpu_exhausted: return "CpuExhausted";
    case errc::net_exhausted: return "NetExhausted";
    case errc::ram_exhausted: return "RamExhausted";
    case errc::quota_exceeded: return "QuotaExceeded";
    case errc::too_few_candidates: return "TooFewCandidates";
    case errc::not_your_slot: return "NotYourSlot";
    case errc::unknown_block: return "UnknownBlock";
    case errc::not_a_producer: return "NotAProducer";
    case errc::overflow_trap: return "OverflowTrap";
    case errc::depth_exceeded: return "DepthExceeded";
    case errc::self_transfer: return "SelfTransfer";
    case errc::non_positive_quantity: return "NonPositiveQuantity";
    case errc::unknown_handler: return "UnknownHandler";
    case errc::unknown_node: return "UnknownNode";
    case errc::bad_linkage: return "BadLinkage";
    case errc::empty_queue: return "EmptyQueue";
    case errc::config_error: return "ConfigError";
    case errc::parse_error: return "ParseError";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::io_error: return "IoError";
    case errc::replay_divergence: return "ReplayDivergence";
    case errc::empty_trace: return "EmptyTrace";
    case errc::empty_distribution: return "EmptyDistribution";
    case errc::too_few_rounds: return "TooFewRounds";
  }
  return "Unknown";
}

}  // namespace eossim
