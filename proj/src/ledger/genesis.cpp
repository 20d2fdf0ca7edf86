#include "ledgerml/ledger/genesis.hpp"

#include <nlohmann/json.hpp>

#include "ledgerml/ledger/codec.hpp"

namespace ledgerml::ledger {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw LedgerError(LedgerErrorCode::InvalidGenesis, what); }

CoinAmount amount_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad(where + " is missing \"" + key + "\"");
  const json& v = obj.at(key);
  try {
    if (v.is_string()) return CoinAmount::parse(v.get<std::string>());
    if (v.is_number_unsigned()) return CoinAmount::parse(std::to_string(v.get<std::uint64_t>()));
    if (v.is_number_integer()) return CoinAmount::from_whole(v.get<std::int64_t>());
  } catch (const ArithmeticError& e) {
    bad(where + "." + key + ": " + e.what());
  }
  bad(where + "." + key + " must be a decimal string or an integer");
}

std::uint64_t id_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number_unsigned()) bad(where + "." + key + " must be a non-negative integer");
  return obj.at(key).get<std::uint64_t>();
}

}  // namespace

GenesisConfig parse_genesis(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("genesis must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "accounts" && key != "assets" && key != "stepLimit") bad("unknown key \"" + key + "\"");

  GenesisConfig cfg;
  if (doc.contains("accounts")) {
    if (!doc["accounts"].is_array()) bad("accounts must be an array");
    std::size_t i = 0;
    for (const auto& a : doc["accounts"]) {
      const auto where = "accounts[" + std::to_string(i++) + "]";
      if (!a.is_object()) bad(where + " must be an object");
      cfg.accounts.push_back({AccountId{id_field(a, "id", where)}, amount_field(a, "coins", where)});
    }
  }
  if (doc.contains("assets")) {
    if (!doc["assets"].is_array()) bad("assets must be an array");
    std::size_t i = 0;
    for (const auto& a : doc["assets"]) {
      const auto where = "assets[" + std::to_string(i++) + "]";
      if (!a.is_object()) bad(where + " must be an object");
      if (!a.contains("assetId") || !a["assetId"].is_string()) bad(where + ".assetId must be a string");
      cfg.assets.push_back(
          {a["assetId"].get<std::string>(), amount_field(a, "issuance", where), AccountId{id_field(a, "holder", where)}});
    }
  }
  if (doc.contains("stepLimit")) {
    const auto& v = doc["stepLimit"];
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) bad("stepLimit must be a positive integer");
    cfg.step_limit = v.get<std::uint64_t>();
  }
  return cfg;
}

ChainState create_genesis(const GenesisConfig& config) {
  if (config.accounts.empty()) throw LedgerError(LedgerErrorCode::EmptyGenesis, "genesis lists no accounts");
  if (config.step_limit == 0) throw LedgerError(LedgerErrorCode::InvalidGenesis, "step limit must be positive");
  ChainState s;
  s.step_limit = config.step_limit;
  std::uint64_t max_id = 0;
  for (const auto& a : config.accounts) {
    if (a.id.is_system()) throw LedgerError(LedgerErrorCode::InvalidGenesis, "account id 0 is reserved");
    if (a.id.value == UINT64_MAX) throw LedgerError(LedgerErrorCode::InvalidGenesis, "account id too large");
    if (a.coins.is_negative())
      throw LedgerError(LedgerErrorCode::NegativeBalance, "account " + std::to_string(a.id.value) + " has negative coins");
    if (s.accounts.count(a.id))
      throw LedgerError(LedgerErrorCode::DuplicateAccount, "account " + std::to_string(a.id.value) + " listed twice");
    Account acct;
    acct.id = a.id;
    acct.coins = a.coins;
    s.accounts.emplace(a.id, std::move(acct));
    try {
      s.coin_supply += a.coins;
    } catch (const ArithmeticError&) {
      throw LedgerError(LedgerErrorCode::InvalidGenesis, "total coin supply overflows");
    }
    max_id = std::max(max_id, a.id.value);
  }
  for (const auto& a : config.assets) {
    if (a.asset_id.empty() || a.asset_id.size() > kMaxAssetIdBytes)
      throw LedgerError(LedgerErrorCode::InvalidGenesis, "asset id must be 1 to 64 bytes");
    if (a.issuance.is_negative())
      throw LedgerError(LedgerErrorCode::NegativeBalance, "asset " + a.asset_id + " has negative issuance");
    if (s.asset_registry.count(a.asset_id))
      throw LedgerError(LedgerErrorCode::DuplicateAsset, "asset " + a.asset_id + " issued twice");
    Account* holder = s.find(a.holder);
    if (holder == nullptr)
      throw LedgerError(LedgerErrorCode::UnknownHolder,
                        "asset " + a.asset_id + " assigned to unknown account " + std::to_string(a.holder.value));
    s.asset_registry.insert(a.asset_id);
    s.asset_supply[a.asset_id] = a.issuance;
    if (!a.issuance.is_zero()) holder->assets[a.asset_id] = a.issuance;
  }
  s.next_account_id = max_id + 1;
  s.head_hash = hash_block(genesis_block(s));
  return s;
}

Block genesis_block(const ChainState& genesis_state) {
  Block b;
  b.height = 0;
  b.state_root = compute_state_root(genesis_state);
  return b;
}

}  // namespace ledgerml::ledger
