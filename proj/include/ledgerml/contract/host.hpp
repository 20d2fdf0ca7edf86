#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ledgerml/common/asset.hpp"
#include "ledgerml/common/ids.hpp"
#include "ledgerml/common/value.hpp"
#include "ledgerml/contract/ast.hpp"
#include "ledgerml/pfa/document.hpp"

namespace ledgerml::contract {

enum class AbortReason {
  None,
  StepLimit,
  TypeError,
  DivisionByZero,
  NumericFault,
  OverSpend,
  KeyTooLong,
  InvalidKey,
  ValueTooLarge,
  MessageTooLong,
  DataTooLarge,
  UnsupportedModelLanguage,
  ModelParseError,
  BadModelHandle,
  InputSchemaMismatch,
  ModelEvalError,
  ModelOutputUnsupported,
  IndexOutOfRange,
  FieldNotFound,
  BadReceiver,
  NegativeAmount,
  DepthExceeded,
  SendRejected,
};

std::string_view abort_reason_name(AbortReason r);

inline constexpr std::uint64_t kDefaultStepLimit = 1'000'000;
inline constexpr std::size_t kMaxKeyBytes = 256;
inline constexpr std::size_t kMaxValueBytes = 64 * 1024;
inline constexpr std::size_t kMaxLogBytes = 4 * 1024;
inline constexpr std::size_t kMaxDataBytes = 256 * 1024;

/// Thrown inside an execution; execute_receive turns it into an Aborted outcome.
class ContractAbort : public std::runtime_error {
 public:
  ContractAbort(AbortReason reason, std::string detail);
  [[nodiscard]] AbortReason reason() const { return reason_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  AbortReason reason_;
  std::string detail_;
};

/// Read-only ledger state visible to a contract. Balances already include
/// the inbound transfer of the triggering transaction.
class LedgerView {
 public:
  virtual ~LedgerView() = default;
  [[nodiscard]] virtual bool account_exists(AccountId id) const = 0;
  [[nodiscard]] virtual std::optional<CoinAmount> coin_balance(AccountId id) const = 0;
  [[nodiscard]] virtual CoinAmount asset_balance(AccountId id, std::string_view asset) const = 0;
  [[nodiscard]] virtual std::optional<Value> storage(AccountId id, std::string_view key) const = 0;
};

struct PendingSend {
  AccountId receiver;
  std::int32_t action = 0;
  CoinAmount coins;
  std::optional<Asset> asset;
  Bytes data;

  friend bool operator==(const PendingSend&, const PendingSend&) = default;
};

struct InvocationInput {
  AccountId self;
  AccountId sender;
  std::int32_t action = 0;
  CoinAmount coins;
  std::optional<Asset> asset;
  Bytes data;
};

struct ExecutionLimits {
  std::uint64_t step_limit = kDefaultStepLimit;
};

struct ExecutionOutcome {
  bool committed = false;
  AbortReason reason = AbortReason::None;
  std::string detail;
  std::vector<PendingSend> sends;
  /// Storage writes; nullopt marks a deletion.
  std::map<std::string, std::optional<Value>> overlay;
  std::vector<std::string> logs;
  std::uint64_t steps = 0;

  /// Canonical bytes of the whole outcome, for determinism checks.
  [[nodiscard]] Bytes canonical() const;
};

/// Shares parsed model documents between executions, keyed by the SHA-256
/// of the definition text. Parse cost is charged on every createModel call
/// whether or not the document is cached.
class ModelCache {
 public:
  std::shared_ptr<const pfa::PfaDocument> get_or_parse(std::string_view def);
  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const pfa::PfaDocument>> docs_;
};

/// Host side of one receive invocation. All methods throw ContractAbort.
class HostContext {
 public:
  HostContext(const LedgerView& view, InvocationInput input, ExecutionLimits limits, ModelCache* cache = nullptr);

  void charge(std::uint64_t steps);
  [[nodiscard]] std::uint64_t steps_used() const { return used_; }
  [[nodiscard]] std::uint64_t step_limit() const { return limits_.step_limit; }

  [[nodiscard]] const InvocationInput& input() const { return input_; }
  [[nodiscard]] const LedgerView& view() const { return view_; }

  void send(AccountId receiver, std::int32_t action, CoinAmount coins, std::optional<Asset> asset, Bytes data);
  [[nodiscard]] Value storage_get(const std::string& key);
  void storage_put(const std::string& key, const Value& value);
  void log(std::string message);
  ModelRef create_model(const std::string& lang, const std::string& def);
  Value score(const Value& model, const Value& input);

  [[nodiscard]] const std::vector<PendingSend>& sends() const { return sends_; }
  [[nodiscard]] const std::map<std::string, std::optional<Value>>& overlay() const { return overlay_; }
  [[nodiscard]] const std::vector<std::string>& logs() const { return logs_; }
  [[nodiscard]] std::size_t model_count() const { return models_.size(); }

  std::vector<PendingSend> take_sends() { return std::move(sends_); }
  std::map<std::string, std::optional<Value>> take_overlay() { return std::move(overlay_); }
  std::vector<std::string> take_logs() { return std::move(logs_); }

 private:
  void check_key(const std::string& key) const;

  const LedgerView& view_;
  InvocationInput input_;
  ExecutionLimits limits_;
  ModelCache* cache_;
  std::uint64_t used_ = 0;
  CoinAmount coins_out_;
  std::map<std::string, CoinAmount> assets_out_;
  std::vector<PendingSend> sends_;
  std::map<std::string, std::optional<Value>> overlay_;
  std::vector<std::string> logs_;
  std::vector<std::shared_ptr<const pfa::PfaDocument>> models_;
};

/// Runs the receive handler. Never throws for runtime faults: they become
/// an Aborted outcome with empty sends and overlay (logs are kept).
ExecutionOutcome execute_receive(const Ast& ast, const LedgerView& view, const InvocationInput& input,
                                 ExecutionLimits limits = {}, ModelCache* cache = nullptr);

}  // namespace ledgerml::contract
