#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerml/common/asset.hpp"
#include "ledgerml/common/bytes.hpp"
#include "ledgerml/common/ids.hpp"
#include "ledgerml/common/value.hpp"
#include "ledgerml/contract/host.hpp"

namespace ledgerml::ledger {

inline constexpr std::int32_t kDeployAction = 1;
inline constexpr std::size_t kMaxBlockTransactions = 1024;
inline constexpr std::size_t kMaxSendDepth = 8;

struct Transaction {
  AccountId sender;
  AccountId receiver;
  std::int32_t action = 0;
  CoinAmount coins;
  std::optional<Asset> asset;
  Bytes data;
  std::uint64_t seq = 0;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Account {
  AccountId id;
  CoinAmount coins;
  /// Zero holdings are never stored.
  std::map<std::string, CoinAmount> assets;
  std::uint64_t seq = 0;
  std::optional<std::string> contract_source;
  std::map<std::string, Value> storage;

  [[nodiscard]] bool is_contract() const { return contract_source.has_value(); }
  [[nodiscard]] CoinAmount asset(const std::string& id) const;

  friend bool operator==(const Account&, const Account&) = default;
};

struct Block {
  std::uint64_t height = 0;
  Hash32 parent_hash{};
  std::uint32_t proposer = 0;
  std::uint64_t tick = 0;
  std::vector<Transaction> transactions;
  Hash32 state_root{};

  friend bool operator==(const Block&, const Block&) = default;
};

struct ChainState {
  std::map<AccountId, Account> accounts;
  std::uint64_t next_account_id = 1;
  std::set<std::string> asset_registry;
  std::uint64_t height = 0;
  CoinAmount coin_supply;
  std::map<std::string, CoinAmount> asset_supply;
  std::uint64_t step_limit = contract::kDefaultStepLimit;
  /// Hash of the last applied block. Not part of the state root.
  Hash32 head_hash{};

  [[nodiscard]] const Account* find(AccountId id) const;
  Account* find(AccountId id);

  friend bool operator==(const ChainState&, const ChainState&) = default;
};

enum class RejectReason {
  UnknownSender,
  SenderIsContract,
  BadSequence,
  NegativeAmount,
  BadAsset,
  UnknownAsset,
  DataTooLarge,
  InsufficientFunds,
  InsufficientAsset,
  UnknownReceiver,
  BadReceiver,
  InvalidContract,
};

std::string_view reject_reason_name(RejectReason r);

struct Verdict {
  bool accepted = true;
  RejectReason reason = RejectReason::UnknownSender;
  std::string detail;

  static Verdict accept() { return {}; }
  static Verdict reject(RejectReason r, std::string detail) { return {false, r, std::move(detail)}; }
};

struct TxReceipt {
  bool committed = true;
  contract::AbortReason reason = contract::AbortReason::None;
  std::string detail;
  std::vector<std::string> logs;
  /// Steps summed over every contract invocation of the transaction.
  std::uint64_t steps = 0;
  std::optional<AccountId> created_account;

  friend bool operator==(const TxReceipt&, const TxReceipt&) = default;
};

enum class LedgerErrorCode {
  InvalidGenesis,
  EmptyGenesis,
  DuplicateAccount,
  DuplicateAsset,
  NegativeBalance,
  UnknownHolder,
  BadParent,
  BadHeight,
  TooManyTransactions,
  InvalidTransaction,
  InvalidTransactionInBlock,
  StateRootMismatch,
  InternalInvariantBroken,
};

std::string_view ledger_error_name(LedgerErrorCode c);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrorCode code, std::string detail);
  LedgerError(std::size_t index, RejectReason reason, std::string detail);

  [[nodiscard]] LedgerErrorCode code() const { return code_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }
  /// Set for InvalidTransaction and InvalidTransactionInBlock.
  [[nodiscard]] std::optional<RejectReason> reject_reason() const { return reason_; }
  [[nodiscard]] std::size_t tx_index() const { return index_; }

 private:
  LedgerErrorCode code_;
  std::string detail_;
  std::optional<RejectReason> reason_;
  std::size_t index_ = 0;
};

}  // namespace ledgerml::ledger
