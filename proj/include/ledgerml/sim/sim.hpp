#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerml/ledger/genesis.hpp"
#include "ledgerml/ledger/types.hpp"

namespace ledgerml::sim {

enum class SimErrorCode { ConfigError, DivergenceDetected };

class SimError : public std::runtime_error {
 public:
  SimError(SimErrorCode code, std::string detail);
  [[nodiscard]] SimErrorCode code() const { return code_; }

 private:
  SimErrorCode code_;
};

struct ScriptedTx {
  std::uint64_t tick = 0;
  std::uint32_t node = 0;
  ledger::Transaction tx;
};

/// The proposer of `height` broadcasts a block whose state root has one
/// byte flipped.
struct TamperFault {
  std::uint32_t node = 0;
  std::uint64_t height = 0;
};

struct SimConfig {
  std::uint32_t node_count = 1;
  std::uint64_t blocks = 1;
  std::uint64_t seed = 0;
  std::uint64_t latency_min = 1;
  std::uint64_t latency_max = 1;
  /// Ticks between scheduled proposals.
  std::uint64_t block_interval = 10;
  ledger::GenesisConfig genesis;
  std::vector<ScriptedTx> script;
  std::optional<TamperFault> fault;
  /// Validate same-tick block deliveries to distinct nodes on worker threads.
  bool parallel = false;
};

/// JSON form:
///   {"nodeCount": 4, "blocks": 6, "seed": 42, "latency": [1, 5],
///    "blockInterval": 10, "genesis": {...} | "genesisFile": "g.json",
///    "txScript": [{"tick": 3, "node": 0, "tx": {"sender": 1, "receiver": 0,
///       "action": 1, "coins": "0", "seq": 0, "sourceFile": "c.qs"}}],
///    "fault": {"kind": "tamperStateRoot", "node": 1, "height": 2}}
/// A tx carries its data as "dataHex", "source" or "sourceFile"; "seq" may
/// be omitted and is then numbered per sender in script order. Relative
/// file names resolve against `base_dir`. Throws SimError(ConfigError).
SimConfig parse_sim_config(std::string_view json, const std::filesystem::path& base_dir = {});

struct NodeSummary {
  std::uint32_t node = 0;
  std::uint64_t height = 0;
  Hash32 head_hash{};
  Hash32 state_root{};
};

struct SimReport {
  bool converged = false;
  std::vector<NodeSummary> nodes;
  /// Blocks finalized identically on every node, in height order.
  std::vector<ledger::Block> chain;
  std::vector<std::vector<ledger::TxReceipt>> receipts;
  std::vector<std::string> divergences;
  std::vector<std::string> rejections;
  /// Canonical JSON rendering; byte-identical for identical configs.
  std::string json;
};

SimReport run_simulation(const SimConfig& config);

/// As run_simulation, but throws DivergenceDetected when nodes disagree.
SimReport run_simulation_checked(const SimConfig& config);

}  // namespace ledgerml::sim
