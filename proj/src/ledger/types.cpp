#include "ledgerml/ledger/types.hpp"

namespace ledgerml::ledger {

CoinAmount Account::asset(const std::string& id) const {
  auto it = assets.find(id);
  return it == assets.end() ? CoinAmount{} : it->second;
}

const Account* ChainState::find(AccountId id) const {
  auto it = accounts.find(id);
  return it == accounts.end() ? nullptr : &it->second;
}

Account* ChainState::find(AccountId id) {
  auto it = accounts.find(id);
  return it == accounts.end() ? nullptr : &it->second;
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::UnknownSender: return "UnknownSender";
    case RejectReason::SenderIsContract: return "SenderIsContract";
    case RejectReason::BadSequence: return "BadSequence";
    case RejectReason::NegativeAmount: return "NegativeAmount";
    case RejectReason::BadAsset: return "BadAsset";
    case RejectReason::UnknownAsset: return "UnknownAsset";
    case RejectReason::DataTooLarge: return "DataTooLarge";
    case RejectReason::InsufficientFunds: return "InsufficientFunds";
    case RejectReason::InsufficientAsset: return "InsufficientAsset";
    case RejectReason::UnknownReceiver: return "UnknownReceiver";
    case RejectReason::BadReceiver: return "BadReceiver";
    case RejectReason::InvalidContract: return "InvalidContract";
  }
  return "?";
}

std::string_view ledger_error_name(LedgerErrorCode c) {
  switch (c) {
    case LedgerErrorCode::InvalidGenesis: return "InvalidGenesis";
    case LedgerErrorCode::EmptyGenesis: return "EmptyGenesis";
    case LedgerErrorCode::DuplicateAccount: return "DuplicateAccount";
    case LedgerErrorCode::DuplicateAsset: return "DuplicateAsset";
    case LedgerErrorCode::NegativeBalance: return "NegativeBalance";
    case LedgerErrorCode::UnknownHolder: return "UnknownHolder";
    case LedgerErrorCode::BadParent: return "BadParent";
    case LedgerErrorCode::BadHeight: return "BadHeight";
    case LedgerErrorCode::TooManyTransactions: return "TooManyTransactions";
    case LedgerErrorCode::InvalidTransaction: return "InvalidTransaction";
    case LedgerErrorCode::InvalidTransactionInBlock: return "InvalidTransactionInBlock";
    case LedgerErrorCode::StateRootMismatch: return "StateRootMismatch";
    case LedgerErrorCode::InternalInvariantBroken: return "InternalInvariantBroken";
  }
  return "?";
}

LedgerError::LedgerError(LedgerErrorCode code, std::string detail)
    : std::runtime_error(std::string(ledger_error_name(code)) + ": " + detail), code_(code), detail_(std::move(detail)) {}

LedgerError::LedgerError(std::size_t index, RejectReason reason, std::string detail)
    : std::runtime_error("InvalidTransactionInBlock(" + std::to_string(index) + ", " +
                         std::string(reject_reason_name(reason)) + "): " + detail),
      code_(LedgerErrorCode::InvalidTransactionInBlock),
      detail_(std::move(detail)),
      reason_(reason),
      index_(index) {}

}  // namespace ledgerml::ledger
