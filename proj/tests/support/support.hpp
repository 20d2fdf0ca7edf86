#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerml/common/value.hpp"
#include "ledgerml/ledger/genesis.hpp"
#include "ledgerml/ledger/ledger.hpp"
#include "ledgerml/pfa/document.hpp"
#include "ledgerml/sim/sim.hpp"

namespace ledgerml::testing {

using Json = nlohmann::json;

std::filesystem::path fixtures_dir();
std::filesystem::path fixture(const std::string& rel);
std::string read_text(const std::filesystem::path& p);
Json read_json(const std::filesystem::path& p);

std::uint64_t bits_of(double d);
double from_bits(std::uint64_t b);
std::string hex_bits(double d);
double parse_hex_bits(const std::string& hex);

/// Distance in representable doubles; both arguments finite.
std::uint64_t ulp_distance(double a, double b);

/// Model output with every double replaced by its 16-digit hex bit pattern.
Json bits_json(const Value& v);

/// Little-endian packing as read by unpackF64.
Bytes pack_f64(const std::vector<double>& v);

/// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Single-node chain driven one transaction per block.
class Chain {
 public:
  explicit Chain(const ledger::GenesisConfig& genesis);

  ledger::TxReceipt submit(ledger::Transaction tx);
  /// Deploys `source` from `sender` and returns the new contract id.
  AccountId deploy(AccountId sender, const std::string& source);
  ledger::Transaction tx(AccountId sender, AccountId receiver, std::int32_t action = 0, CoinAmount coins = {},
                         std::optional<Asset> asset = std::nullopt, Bytes data = {}) const;

  [[nodiscard]] const ledger::ChainState& state() const { return state_; }
  [[nodiscard]] const std::vector<ledger::Block>& blocks() const { return blocks_; }
  ledger::ExecutionCache& cache() { return cache_; }

 private:
  ledger::ChainState state_;
  std::vector<ledger::Block> blocks_;
  ledger::ExecutionCache cache_;
};

ledger::GenesisConfig demo_genesis();

/// The committed 4-node demo configuration.
sim::SimConfig demo_sim_config();

/// Correctly rounded references computed with MPFR at 256 bits.
double mpfr_exp(double x);
double mpfr_ln(double x);
double mpfr_logit(double x);
std::vector<double> mpfr_softmax(const std::vector<double>& v);

}  // namespace ledgerml::testing
