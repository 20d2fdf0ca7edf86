#include <fstream>
#include <map>
#include <set>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ledgerml/sim/sim.hpp"

namespace ledgerml::sim {

SimError::SimError(SimErrorCode code, std::string detail)
    : std::runtime_error((code == SimErrorCode::ConfigError ? "ConfigError: " : "DivergenceDetected: ") + detail),
      code_(code) {}

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& what) { throw SimError(SimErrorCode::ConfigError, what); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) bad("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& name) {
  fs::path p(name);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::uint64_t uint_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number_unsigned()) bad(where + "." + key + " must be a non-negative integer");
  return obj.at(key).get<std::uint64_t>();
}

CoinAmount amount(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return CoinAmount::parse(v.get<std::string>());
    if (v.is_number_unsigned()) return CoinAmount::parse(std::to_string(v.get<std::uint64_t>()));
  } catch (const ArithmeticError& e) {
    bad(where + ": " + e.what());
  }
  bad(where + " must be a decimal string or a non-negative integer");
}

ledger::Transaction parse_tx(const json& t, const std::string& where, const fs::path& base,
                             std::map<std::uint64_t, std::uint64_t>& next_seq) {
  if (!t.is_object()) bad(where + " must be an object");
  static const std::set<std::string> kKeys = {"sender", "receiver", "action", "coins", "asset",
                                              "seq",    "dataHex",  "source", "sourceFile"};
  for (const auto& [key, _] : t.items())
    if (!kKeys.count(key)) bad(where + ": unknown key \"" + key + "\"");
  ledger::Transaction tx;
  tx.sender = AccountId{uint_field(t, "sender", where)};
  tx.receiver = AccountId{uint_field(t, "receiver", where)};
  if (t.contains("action")) {
    if (!t["action"].is_number_integer()) bad(where + ".action must be an integer");
    const auto a = t["action"].get<std::int64_t>();
    if (a < INT32_MIN || a > INT32_MAX) bad(where + ".action out of range");
    tx.action = static_cast<std::int32_t>(a);
  }
  if (t.contains("coins")) tx.coins = amount(t["coins"], where + ".coins");
  if (t.contains("asset")) {
    const auto& a = t["asset"];
    if (!a.is_object() || !a.contains("assetId") || !a["assetId"].is_string() || !a.contains("amount"))
      bad(where + ".asset must be {\"assetId\": string, \"amount\": decimal}");
    tx.asset = Asset{a["assetId"].get<std::string>(), amount(a["amount"], where + ".asset.amount")};
  }
  const int sources = static_cast<int>(t.contains("dataHex")) + static_cast<int>(t.contains("source")) +
                      static_cast<int>(t.contains("sourceFile"));
  if (sources > 1) bad(where + ": give at most one of dataHex, source, sourceFile");
  try {
    if (t.contains("dataHex")) tx.data = from_hex(t["dataHex"].get<std::string>());
  } catch (const std::exception& e) {
    bad(where + ".dataHex: " + e.what());
  }
  if (t.contains("source")) {
    if (!t["source"].is_string()) bad(where + ".source must be a string");
    tx.data = to_bytes(t["source"].get<std::string>());
  }
  if (t.contains("sourceFile")) {
    if (!t["sourceFile"].is_string()) bad(where + ".sourceFile must be a string");
    tx.data = to_bytes(slurp(resolve(base, t["sourceFile"].get<std::string>())));
  }
  if (t.contains("seq")) {
    tx.seq = uint_field(t, "seq", where);
    next_seq[tx.sender.value] = tx.seq + 1;
  } else {
    tx.seq = next_seq[tx.sender.value]++;
  }
  return tx;
}

}  // namespace

SimConfig parse_sim_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("config must be a JSON object");
  static const std::set<std::string> kKeys = {"nodeCount", "blocks",      "seed",     "latency", "blockInterval",
                                              "genesis",   "genesisFile", "txScript", "fault",   "parallel"};
  for (const auto& [key, _] : doc.items())
    if (!kKeys.count(key)) bad("unknown key \"" + key + "\"");

  SimConfig cfg;
  const auto nodes = uint_field(doc, "nodeCount", "config");
  if (nodes < 1 || nodes > 16) bad("nodeCount must be between 1 and 16");
  cfg.node_count = static_cast<std::uint32_t>(nodes);
  cfg.blocks = uint_field(doc, "blocks", "config");
  if (cfg.blocks < 1 || cfg.blocks > 100000) bad("blocks must be between 1 and 100000");
  cfg.seed = uint_field(doc, "seed", "config");
  if (!doc.contains("latency") || !doc["latency"].is_array() || doc["latency"].size() != 2 ||
      !doc["latency"][0].is_number_unsigned() || !doc["latency"][1].is_number_unsigned())
    bad("latency must be [min, max] with non-negative integers");
  cfg.latency_min = doc["latency"][0].get<std::uint64_t>();
  cfg.latency_max = doc["latency"][1].get<std::uint64_t>();
  if (cfg.latency_min < 1 || cfg.latency_min > cfg.latency_max || cfg.latency_max > 1'000'000)
    bad("latency must satisfy 1 <= min <= max <= 1000000");
  if (doc.contains("blockInterval")) {
    cfg.block_interval = uint_field(doc, "blockInterval", "config");
    if (cfg.block_interval < 1 || cfg.block_interval > 1'000'000) bad("blockInterval must be between 1 and 1000000");
  }
  if (doc.contains("parallel")) {
    if (!doc["parallel"].is_boolean()) bad("parallel must be a boolean");
    cfg.parallel = doc["parallel"].get<bool>();
  }

  if (doc.contains("genesis") == doc.contains("genesisFile")) bad("give exactly one of genesis, genesisFile");
  try {
    if (doc.contains("genesis")) {
      cfg.genesis = ledger::parse_genesis(doc["genesis"].dump());
    } else {
      if (!doc["genesisFile"].is_string()) bad("genesisFile must be a string");
      cfg.genesis = ledger::parse_genesis(slurp(resolve(base_dir, doc["genesisFile"].get<std::string>())));
    }
  } catch (const ledger::LedgerError& e) {
    bad(std::string("genesis: ") + e.what());
  }

  if (doc.contains("txScript")) {
    if (!doc["txScript"].is_array()) bad("txScript must be an array");
    std::map<std::uint64_t, std::uint64_t> next_seq;
    std::size_t i = 0;
    for (const auto& entry : doc["txScript"]) {
      const auto where = "txScript[" + std::to_string(i++) + "]";
      if (!entry.is_object() || !entry.contains("tx")) bad(where + " must be {tick, node, tx}");
      ScriptedTx s;
      s.tick = uint_field(entry, "tick", where);
      const auto node = uint_field(entry, "node", where);
      if (node >= cfg.node_count) bad(where + ".node out of range");
      s.node = static_cast<std::uint32_t>(node);
      s.tx = parse_tx(entry["tx"], where + ".tx", base_dir, next_seq);
      cfg.script.push_back(std::move(s));
    }
  }

  if (doc.contains("fault")) {
    const auto& f = doc["fault"];
    if (!f.is_object() || !f.contains("kind") || f["kind"] != "tamperStateRoot")
      bad("fault.kind must be \"tamperStateRoot\"");
    TamperFault t;
    const auto node = uint_field(f, "node", "fault");
    t.height = uint_field(f, "height", "fault");
    if (node >= cfg.node_count) bad("fault.node out of range");
    t.node = static_cast<std::uint32_t>(node);
    if (t.height < 1 || t.height > cfg.blocks) bad("fault.height must be between 1 and blocks");
    if (t.height % cfg.node_count != t.node) bad("fault.node is not the proposer of fault.height");
    cfg.fault = t;
  }
  return cfg;
}

}  // namespace ledgerml::sim
