#include "ledgerml/contract/host.hpp"

#include "ledgerml/common/sha256.hpp"
#include "ledgerml/pfa/error.hpp"

namespace ledgerml::contract {

std::string_view abort_reason_name(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "None";
    case AbortReason::StepLimit: return "StepLimit";
    case AbortReason::TypeError: return "TypeError";
    case AbortReason::DivisionByZero: return "DivisionByZero";
    case AbortReason::NumericFault: return "NumericFault";
    case AbortReason::OverSpend: return "OverSpend";
    case AbortReason::KeyTooLong: return "KeyTooLong";
    case AbortReason::InvalidKey: return "InvalidKey";
    case AbortReason::ValueTooLarge: return "ValueTooLarge";
    case AbortReason::MessageTooLong: return "MessageTooLong";
    case AbortReason::DataTooLarge: return "DataTooLarge";
    case AbortReason::UnsupportedModelLanguage: return "UnsupportedModelLanguage";
    case AbortReason::ModelParseError: return "ModelParseError";
    case AbortReason::BadModelHandle: return "BadModelHandle";
    case AbortReason::InputSchemaMismatch: return "InputSchemaMismatch";
    case AbortReason::ModelEvalError: return "ModelEvalError";
    case AbortReason::ModelOutputUnsupported: return "ModelOutputUnsupported";
    case AbortReason::IndexOutOfRange: return "IndexOutOfRange";
    case AbortReason::FieldNotFound: return "FieldNotFound";
    case AbortReason::BadReceiver: return "BadReceiver";
    case AbortReason::NegativeAmount: return "NegativeAmount";
    case AbortReason::DepthExceeded: return "DepthExceeded";
    case AbortReason::SendRejected: return "SendRejected";
  }
  return "?";
}

ContractAbort::ContractAbort(AbortReason reason, std::string detail)
    : std::runtime_error(std::string(abort_reason_name(reason)) + (detail.empty() ? "" : ": " + detail)),
      reason_(reason),
      detail_(std::move(detail)) {}

namespace {

std::uint64_t sixteenths(std::size_t bytes) { return (static_cast<std::uint64_t>(bytes) + 15) / 16; }

void encode_send(ByteWriter& w, const PendingSend& s) {
  w.u64(s.receiver.value);
  w.i32(s.action);
  w.i128(s.coins.units());
  w.u8(s.asset ? 1 : 0);
  if (s.asset) {
    w.str(s.asset->id);
    w.i128(s.asset->amount.units());
  }
  w.bytes(s.data);
}

}  // namespace

Bytes ExecutionOutcome::canonical() const {
  ByteWriter w;
  w.u8(committed ? 1 : 0);
  w.str(abort_reason_name(reason));
  w.str(detail);
  w.u32(static_cast<std::uint32_t>(sends.size()));
  for (const auto& s : sends) encode_send(w, s);
  w.u32(static_cast<std::uint32_t>(overlay.size()));
  for (const auto& [key, value] : overlay) {
    w.str(key);
    w.u8(value ? 1 : 0);
    if (value) encode_value(w, *value);
  }
  w.u32(static_cast<std::uint32_t>(logs.size()));
  for (const auto& line : logs) w.str(line);
  w.u64(steps);
  return std::move(w).take();
}

std::shared_ptr<const pfa::PfaDocument> ModelCache::get_or_parse(std::string_view def) {
  const auto digest = sha256(std::span(reinterpret_cast<const std::uint8_t*>(def.data()), def.size()));
  std::string key(digest.begin(), digest.end());
  {
    std::lock_guard lock(mu_);
    if (auto it = docs_.find(key); it != docs_.end()) return it->second;
  }
  auto doc = pfa::parse_pfa(def);
  std::lock_guard lock(mu_);
  return docs_.emplace(std::move(key), std::move(doc)).first->second;
}

std::size_t ModelCache::size() const {
  std::lock_guard lock(mu_);
  return docs_.size();
}

HostContext::HostContext(const LedgerView& view, InvocationInput input, ExecutionLimits limits, ModelCache* cache)
    : view_(view), input_(std::move(input)), limits_(limits), cache_(cache) {}

void HostContext::charge(std::uint64_t steps) {
  if (steps > limits_.step_limit - used_) {
    used_ = limits_.step_limit;
    throw ContractAbort(AbortReason::StepLimit, "step limit " + std::to_string(limits_.step_limit) + " reached");
  }
  used_ += steps;
}

void HostContext::send(AccountId receiver, std::int32_t action, CoinAmount coins, std::optional<Asset> asset,
                       Bytes data) {
  if (coins.is_negative()) throw ContractAbort(AbortReason::NegativeAmount, "send of negative coins");
  if (asset && asset->amount.is_negative()) throw ContractAbort(AbortReason::NegativeAmount, "send of negative asset amount");
  if (receiver.is_system() || !view_.account_exists(receiver))
    throw ContractAbort(AbortReason::BadReceiver, "no account " + std::to_string(receiver.value));
  if (data.size() > kMaxDataBytes)
    throw ContractAbort(AbortReason::DataTooLarge, std::to_string(data.size()) + " bytes of send data");
  charge(1 + sixteenths(data.size()));

  const CoinAmount available = view_.coin_balance(input_.self).value_or(CoinAmount{});
  const CoinAmount out = coins_out_ + coins;
  if (out > available)
    throw ContractAbort(AbortReason::OverSpend, "sends total " + out.to_string() + " but only " + available.to_string() +
                                                    " is available");
  if (asset) {
    const CoinAmount held = view_.asset_balance(input_.self, asset->id);
    const CoinAmount asset_out = assets_out_[asset->id] + asset->amount;
    if (asset_out > held)
      throw ContractAbort(AbortReason::OverSpend, "asset '" + asset->id + "' sends total " + asset_out.to_string() +
                                                      " but only " + held.to_string() + " is held");
    assets_out_[asset->id] = asset_out;
  }
  coins_out_ = out;
  sends_.push_back({receiver, action, coins, std::move(asset), std::move(data)});
}

void HostContext::check_key(const std::string& key) const {
  if (key.empty()) throw ContractAbort(AbortReason::InvalidKey, "storage key is empty");
  if (key.size() > kMaxKeyBytes)
    throw ContractAbort(AbortReason::KeyTooLong, "storage key of " + std::to_string(key.size()) + " bytes");
}

Value HostContext::storage_get(const std::string& key) {
  check_key(key);
  charge(1 + sixteenths(key.size()));
  if (auto it = overlay_.find(key); it != overlay_.end()) {
    if (!it->second) return Value();
    charge(sixteenths(encode_value(*it->second).size()));
    return *it->second;
  }
  auto stored = view_.storage(input_.self, key);
  if (!stored) return Value();
  charge(sixteenths(encode_value(*stored).size()));
  return *stored;
}

namespace {

bool contains_model(const Value& v) {
  if (v.is(Value::Kind::Model)) return true;
  if (v.is(Value::Kind::List)) {
    for (const auto& x : v.as_list())
      if (contains_model(x)) return true;
  }
  if (v.is(Value::Kind::Rec)) {
    for (const auto& x : v.as_rec().values)
      if (contains_model(x)) return true;
  }
  return false;
}

}  // namespace

void HostContext::storage_put(const std::string& key, const Value& value) {
  check_key(key);
  if (value.is_none()) {
    charge(1 + sixteenths(key.size()));
    overlay_[key] = std::nullopt;
    return;
  }
  if (contains_model(value)) throw ContractAbort(AbortReason::TypeError, "model handles cannot be stored");
  const auto size = encode_value(value).size();
  if (size > kMaxValueBytes)
    throw ContractAbort(AbortReason::ValueTooLarge, "encoded value of " + std::to_string(size) + " bytes");
  charge(1 + sixteenths(key.size()) + sixteenths(size));
  overlay_[key] = value;
}

void HostContext::log(std::string message) {
  if (message.size() > kMaxLogBytes)
    throw ContractAbort(AbortReason::MessageTooLong, "log message of " + std::to_string(message.size()) + " bytes");
  charge(1 + sixteenths(message.size()));
  logs_.push_back(std::move(message));
}

ModelRef HostContext::create_model(const std::string& lang, const std::string& def) {
  if (lang != "PFA") throw ContractAbort(AbortReason::UnsupportedModelLanguage, "model language '" + lang + "'");
  charge(1 + sixteenths(def.size()));
  std::shared_ptr<const pfa::PfaDocument> doc;
  try {
    doc = cache_ ? cache_->get_or_parse(def) : pfa::parse_pfa(def);
  } catch (const pfa::PfaError& e) {
    throw ContractAbort(AbortReason::ModelParseError, e.what());
  }
  models_.push_back(std::move(doc));
  return ModelRef{static_cast<std::uint32_t>(models_.size() - 1)};
}

Value HostContext::score(const Value& model, const Value& input) {
  if (!model.is(Value::Kind::Model) || model.as_model().index >= models_.size())
    throw ContractAbort(AbortReason::BadModelHandle, "score expects a handle returned by createModel");
  charge(1);
  const auto& doc = *models_[model.as_model().index];
  pfa::EvalResult result;
  try {
    result = pfa::evaluate(doc, input, limits_.step_limit - used_);
  } catch (const pfa::PfaError& e) {
    switch (e.kind()) {
      case pfa::ErrorKind::EvalBudgetExceeded:
        used_ = limits_.step_limit;
        throw ContractAbort(AbortReason::StepLimit, "step limit reached while scoring");
      case pfa::ErrorKind::InputSchemaMismatch: throw ContractAbort(AbortReason::InputSchemaMismatch, e.detail());
      case pfa::ErrorKind::NumericFault: throw ContractAbort(AbortReason::NumericFault, e.detail());
      default: throw ContractAbort(AbortReason::ModelEvalError, e.what());
    }
  }
  charge(result.cost);

  auto as_prediction = [](const Value& v) -> std::optional<Value> {
    if (v.is(Value::Kind::Dbl)) return v;
    if (v.is(Value::Kind::Int)) return Value::dbl(static_cast<double>(v.as_int()));
    return std::nullopt;
  };
  const Value& out = result.value;
  if (auto p = as_prediction(out)) {
    Record rec;
    rec.set("prediction", *p);
    return Value::record(std::move(rec));
  }
  if (out.is(Value::Kind::Rec)) {
    if (const Value* field = out.as_rec().find("prediction")) {
      if (auto p = as_prediction(*field)) {
        Record rec = out.as_rec();
        rec.set("prediction", *p);
        return Value::record(std::move(rec));
      }
    }
  }
  throw ContractAbort(AbortReason::ModelOutputUnsupported,
                      "model output must be a number or a record with a numeric 'prediction' field");
}

}  // namespace ledgerml::contract
