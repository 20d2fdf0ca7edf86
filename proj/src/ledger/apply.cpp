#include <algorithm>

#include "ledgerml/common/sha256.hpp"
#include "ledgerml/contract/parser.hpp"
#include "ledgerml/ledger/codec.hpp"
#include "ledgerml/ledger/ledger.hpp"

namespace ledgerml::ledger {

using contract::AbortReason;
using contract::ContractAbort;

std::shared_ptr<const contract::Ast> ExecutionCache::contract(const std::string& source) {
  const auto digest = sha256(to_bytes(source));
  std::string key(digest.begin(), digest.end());
  {
    std::lock_guard lock(mu_);
    if (auto it = asts_.find(key); it != asts_.end()) return it->second;
  }
  auto ast = std::make_shared<const contract::Ast>(contract::parse_contract(source));
  std::lock_guard lock(mu_);
  return asts_.emplace(std::move(key), std::move(ast)).first->second;
}

namespace {

class StateView final : public contract::LedgerView {
 public:
  explicit StateView(const ChainState& s) : s_(s) {}

  [[nodiscard]] bool account_exists(AccountId id) const override { return s_.find(id) != nullptr; }
  [[nodiscard]] std::optional<CoinAmount> coin_balance(AccountId id) const override {
    const Account* a = s_.find(id);
    return a ? std::optional(a->coins) : std::nullopt;
  }
  [[nodiscard]] CoinAmount asset_balance(AccountId id, std::string_view asset) const override {
    const Account* a = s_.find(id);
    return a ? a->asset(std::string(asset)) : CoinAmount{};
  }
  [[nodiscard]] std::optional<Value> storage(AccountId id, std::string_view key) const override {
    const Account* a = s_.find(id);
    if (a == nullptr) return std::nullopt;
    auto it = a->storage.find(std::string(key));
    return it == a->storage.end() ? std::nullopt : std::optional(it->second);
  }

 private:
  const ChainState& s_;
};

std::shared_ptr<const contract::Ast> parse_source(const std::string& source, ExecutionCache* cache) {
  if (cache) return cache->contract(source);
  return std::make_shared<const contract::Ast>(contract::parse_contract(source));
}

bool valid_utf8(const Bytes& b) {
  std::size_t i = 0;
  while (i < b.size()) {
    const auto c = b[i];
    std::size_t n = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      n = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      n = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      n = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + n >= b.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((b[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (b[i + k] & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[n] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += n + 1;
  }
  return true;
}

void credit_asset(Account& a, const std::string& id, CoinAmount amount) {
  if (amount.is_zero()) return;
  a.assets[id] += amount;
}

void debit_asset(Account& a, const std::string& id, CoinAmount amount) {
  if (amount.is_zero()) return;
  auto it = a.assets.find(id);
  it->second -= amount;
  if (it->second.is_zero()) a.assets.erase(it);
}

struct Delivery {
  AccountId from;
  AccountId to;
  std::int32_t action;
  CoinAmount coins;
  std::optional<Asset> asset;
  Bytes data;
};

class Executor {
 public:
  Executor(ChainState& s, ExecutionCache* cache, TxReceipt& receipt) : s_(s), cache_(cache), receipt_(receipt) {}

  // Moves funds and runs the receiver's handler, then its sends depth-first.
  void deliver(const Delivery& d, std::size_t depth) {
    if (depth > kMaxSendDepth)
      throw ContractAbort(AbortReason::DepthExceeded, "send chain deeper than " + std::to_string(kMaxSendDepth));
    Account* from = s_.find(d.from);
    Account* to = s_.find(d.to);
    if (from == nullptr || to == nullptr || d.to.is_system())
      throw ContractAbort(AbortReason::SendRejected, "receiver " + std::to_string(d.to.value) + " does not exist");
    if (from->coins < d.coins)
      throw ContractAbort(AbortReason::SendRejected, "account " + std::to_string(d.from.value) + " cannot cover " +
                                                         d.coins.to_string() + " coins");
    if (d.asset) {
      if (!s_.asset_registry.count(d.asset->id))
        throw ContractAbort(AbortReason::SendRejected, "unknown asset '" + d.asset->id + "'");
      if (from->asset(d.asset->id) < d.asset->amount)
        throw ContractAbort(AbortReason::SendRejected, "account " + std::to_string(d.from.value) + " cannot cover " +
                                                           d.asset->amount.to_string() + " " + d.asset->id);
    }
    from->coins -= d.coins;
    to->coins += d.coins;
    if (d.asset) {
      debit_asset(*from, d.asset->id, d.asset->amount);
      credit_asset(*to, d.asset->id, d.asset->amount);
    }
    if (!to->is_contract()) return;

    std::shared_ptr<const contract::Ast> ast;
    try {
      ast = parse_source(*to->contract_source, cache_);
    } catch (const contract::ParseError& e) {
      throw LedgerError(LedgerErrorCode::InternalInvariantBroken, "stored contract no longer parses: " + std::string(e.what()));
    }
    contract::InvocationInput in{d.to, d.from, d.action, d.coins, d.asset, d.data};
    StateView view(s_);
    auto outcome = contract::execute_receive(*ast, view, in, {s_.step_limit}, cache_ ? &cache_->models() : nullptr);
    receipt_.steps += outcome.steps;
    for (auto& line : outcome.logs) receipt_.logs.push_back(std::move(line));
    if (!outcome.committed) throw ContractAbort(outcome.reason, outcome.detail);

    Account* self = s_.find(d.to);
    for (auto& [key, value] : outcome.overlay) {
      if (value) self->storage[key] = std::move(*value);
      else self->storage.erase(key);
    }
    for (auto& send : outcome.sends) {
      deliver({d.to, send.receiver, send.action, send.coins, std::move(send.asset), std::move(send.data)}, depth + 1);
    }
  }

 private:
  ChainState& s_;
  ExecutionCache* cache_;
  TxReceipt& receipt_;
};

}  // namespace

Verdict validate_transaction(const ChainState& state, const Transaction& tx, ExecutionCache* cache) {
  const Account* sender = state.find(tx.sender);
  if (sender == nullptr) return Verdict::reject(RejectReason::UnknownSender, "no account " + std::to_string(tx.sender.value));
  if (sender->is_contract())
    return Verdict::reject(RejectReason::SenderIsContract, "contract accounts only send from their handlers");
  if (tx.seq != sender->seq)
    return Verdict::reject(RejectReason::BadSequence,
                           "expected seq " + std::to_string(sender->seq) + ", got " + std::to_string(tx.seq));
  if (tx.coins.is_negative()) return Verdict::reject(RejectReason::NegativeAmount, "negative coins");
  if (tx.asset) {
    if (tx.asset->id.empty() || tx.asset->id.size() > kMaxAssetIdBytes)
      return Verdict::reject(RejectReason::BadAsset, "asset id must be 1 to 64 bytes");
    if (tx.asset->amount.is_negative()) return Verdict::reject(RejectReason::NegativeAmount, "negative asset amount");
    if (!state.asset_registry.count(tx.asset->id))
      return Verdict::reject(RejectReason::UnknownAsset, "asset '" + tx.asset->id + "' is not registered");
  }
  if (tx.data.size() > contract::kMaxDataBytes)
    return Verdict::reject(RejectReason::DataTooLarge, std::to_string(tx.data.size()) + " bytes of data");
  if (sender->coins < tx.coins)
    return Verdict::reject(RejectReason::InsufficientFunds,
                           "balance " + sender->coins.to_string() + " < " + tx.coins.to_string());
  if (tx.asset && sender->asset(tx.asset->id) < tx.asset->amount)
    return Verdict::reject(RejectReason::InsufficientAsset, "holding of " + tx.asset->id + " is " +
                                                                sender->asset(tx.asset->id).to_string());
  if (tx.receiver.is_system()) {
    if (tx.action != kDeployAction)
      return Verdict::reject(RejectReason::BadReceiver, "account 0 only accepts deployments (action 1)");
    if (!valid_utf8(tx.data)) return Verdict::reject(RejectReason::InvalidContract, "contract source is not UTF-8");
    try {
      parse_source(std::string(tx.data.begin(), tx.data.end()), cache);
    } catch (const contract::ParseError& e) {
      return Verdict::reject(RejectReason::InvalidContract, e.what());
    }
    return Verdict::accept();
  }
  if (state.find(tx.receiver) == nullptr)
    return Verdict::reject(RejectReason::UnknownReceiver, "no account " + std::to_string(tx.receiver.value));
  return Verdict::accept();
}

TxReceipt apply_transaction(ChainState& state, const Transaction& tx, ExecutionCache* cache) {
  if (auto v = validate_transaction(state, tx, cache); !v.accepted) {
    throw LedgerError(LedgerErrorCode::InvalidTransaction, std::string(reject_reason_name(v.reason)) + ": " + v.detail);
  }
  TxReceipt receipt;
  state.find(tx.sender)->seq += 1;

  if (tx.receiver.is_system()) {
    if (state.next_account_id == UINT64_MAX)
      throw LedgerError(LedgerErrorCode::InternalInvariantBroken, "account id space exhausted");
    const AccountId id{state.next_account_id++};
    Account acct;
    acct.id = id;
    acct.contract_source = std::string(tx.data.begin(), tx.data.end());
    Account& sender = *state.find(tx.sender);
    sender.coins -= tx.coins;
    acct.coins = tx.coins;
    if (tx.asset) {
      debit_asset(sender, tx.asset->id, tx.asset->amount);
      credit_asset(acct, tx.asset->id, tx.asset->amount);
    }
    state.accounts.emplace(id, std::move(acct));
    receipt.created_account = id;
    return receipt;
  }

  const bool runs_contract = state.find(tx.receiver)->is_contract();
  std::optional<ChainState> before;
  if (runs_contract) before = state;
  try {
    Executor(state, cache, receipt).deliver({tx.sender, tx.receiver, tx.action, tx.coins, tx.asset, tx.data}, 1);
  } catch (const ContractAbort& e) {
    if (!before) throw LedgerError(LedgerErrorCode::InternalInvariantBroken, e.what());
    state = std::move(*before);
    receipt.committed = false;
    receipt.reason = e.reason();
    receipt.detail = e.detail();
  } catch (const ArithmeticError& e) {
    if (!before) throw LedgerError(LedgerErrorCode::InternalInvariantBroken, e.what());
    state = std::move(*before);
    receipt.committed = false;
    receipt.reason = AbortReason::NumericFault;
    receipt.detail = e.what();
  }
  return receipt;
}

namespace {

void check_header(const ChainState& state, const Block& block) {
  if (block.height != state.height + 1)
    throw LedgerError(LedgerErrorCode::BadHeight,
                      "expected height " + std::to_string(state.height + 1) + ", got " + std::to_string(block.height));
  if (block.parent_hash != state.head_hash)
    throw LedgerError(LedgerErrorCode::BadParent, "parent " + to_hex(block.parent_hash) + " is not the head " +
                                                      to_hex(state.head_hash));
  if (block.transactions.size() > kMaxBlockTransactions)
    throw LedgerError(LedgerErrorCode::TooManyTransactions, std::to_string(block.transactions.size()) + " transactions");
}

}  // namespace

BlockResult apply_block(const ChainState& state, const Block& block, ExecutionCache* cache) {
  check_header(state, block);
  BlockResult out{state, {}};
  out.receipts.reserve(block.transactions.size());
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    if (auto v = validate_transaction(out.state, tx, cache); !v.accepted) throw LedgerError(i, v.reason, v.detail);
    out.receipts.push_back(apply_transaction(out.state, tx, cache));
  }
  out.state.height = block.height;
  const Hash32 root = compute_state_root(out.state);
  if (root != block.state_root)
    throw LedgerError(LedgerErrorCode::StateRootMismatch,
                      "block claims " + to_hex(block.state_root) + ", execution gives " + to_hex(root));
  out.state.head_hash = hash_block(block);
  return out;
}

Proposal build_block(const ChainState& state, std::uint32_t proposer, std::uint64_t tick,
                     const std::vector<Transaction>& candidates, ExecutionCache* cache) {
  Proposal p{{}, state, {}, {}};
  p.block.height = state.height + 1;
  p.block.parent_hash = state.head_hash;
  p.block.proposer = proposer;
  p.block.tick = tick;
  for (const auto& tx : candidates) {
    if (p.block.transactions.size() == kMaxBlockTransactions) break;
    if (auto v = validate_transaction(p.state, tx, cache); !v.accepted) {
      p.skipped.emplace_back(tx, std::move(v));
      continue;
    }
    p.receipts.push_back(apply_transaction(p.state, tx, cache));
    p.block.transactions.push_back(tx);
  }
  p.state.height = p.block.height;
  p.block.state_root = compute_state_root(p.state);
  p.state.head_hash = hash_block(p.block);
  return p;
}

bool check_conservation(const ChainState& state) {
  try {
    CoinAmount coins;
    std::map<std::string, CoinAmount> assets;
    for (const auto& [id, a] : state.accounts) {
      if (a.coins.is_negative()) return false;
      coins += a.coins;
      for (const auto& [asset, amount] : a.assets) {
        if (!amount.is_negative() && !amount.is_zero() && state.asset_registry.count(asset)) {
          assets[asset] += amount;
        } else {
          return false;
        }
      }
    }
    if (coins != state.coin_supply) return false;
    for (const auto& id : state.asset_registry) {
      auto supply = state.asset_supply.find(id);
      const CoinAmount want = supply == state.asset_supply.end() ? CoinAmount{} : supply->second;
      const CoinAmount have = assets.count(id) ? assets[id] : CoinAmount{};
      if (want != have) return false;
    }
    return true;
  } catch (const ArithmeticError&) {
    return false;
  }
}

}  // namespace ledgerml::ledger
