#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>

#include "ledgerml/contract/ast.hpp"
#include "ledgerml/contract/host.hpp"
#include "ledgerml/ledger/types.hpp"

namespace ledgerml::ledger {

/// Parsed contracts and models shared across executions. Thread-safe.
class ExecutionCache {
 public:
  /// Throws contract::ParseError.
  std::shared_ptr<const contract::Ast> contract(const std::string& source);
  contract::ModelCache& models() { return models_; }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const contract::Ast>> asts_;
  contract::ModelCache models_;
};

Verdict validate_transaction(const ChainState& state, const Transaction& tx, ExecutionCache* cache = nullptr);

/// Applies an accepted transaction in place. Throws LedgerError(InvalidTransaction)
/// if validation fails; contract aborts roll back everything except the
/// sender's sequence bump and are reported in the receipt.
TxReceipt apply_transaction(ChainState& state, const Transaction& tx, ExecutionCache* cache = nullptr);

struct BlockResult {
  ChainState state;
  std::vector<TxReceipt> receipts;
};

/// Full validation and re-execution of a block on top of `state`.
BlockResult apply_block(const ChainState& state, const Block& block, ExecutionCache* cache = nullptr);

struct Proposal {
  Block block;
  ChainState state;
  std::vector<TxReceipt> receipts;
  /// Candidates left out because they were invalid at their turn.
  std::vector<std::pair<Transaction, Verdict>> skipped;
};

/// Builds the next block from candidates in the given order, skipping
/// transactions that do not validate, and fills in the state root.
Proposal build_block(const ChainState& state, std::uint32_t proposer, std::uint64_t tick,
                     const std::vector<Transaction>& candidates, ExecutionCache* cache = nullptr);

/// True when coin and asset totals match the recorded supplies and no
/// balance is negative.
bool check_conservation(const ChainState& state);

}  // namespace ledgerml::ledger
