#pragma once

#include <string_view>

#include "ledgerml/ledger/types.hpp"

namespace ledgerml::ledger {

struct GenesisAccount {
  AccountId id;
  CoinAmount coins;
};

struct GenesisAsset {
  std::string asset_id;
  CoinAmount issuance;
  AccountId holder;
};

struct GenesisConfig {
  std::vector<GenesisAccount> accounts;
  std::vector<GenesisAsset> assets;
  std::uint64_t step_limit = contract::kDefaultStepLimit;
};

/// JSON form: {"accounts": [{"id": 1, "coins": "1000.0"}],
///             "assets": [{"assetId": "GOLD", "issuance": "50", "holder": 1}],
///             "stepLimit": 1000000}
/// Amounts may be decimal strings or integers. Throws LedgerError(InvalidGenesis).
GenesisConfig parse_genesis(std::string_view json);

/// Height-0 state with head_hash set to the hash of genesis_block().
ChainState create_genesis(const GenesisConfig& config);

/// The implicit height-0 block: zero parent, no transactions.
Block genesis_block(const ChainState& genesis_state);

}  // namespace ledgerml::ledger
