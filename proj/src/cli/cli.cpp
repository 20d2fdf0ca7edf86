#include "ledgerml/cli/cli.hpp"

#include <CLI11.hpp>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ledgerml/contract/host.hpp"
#include "ledgerml/contract/parser.hpp"
#include "ledgerml/ledger/codec.hpp"
#include "ledgerml/ledger/genesis.hpp"
#include "ledgerml/ledger/ledger.hpp"
#include "ledgerml/pfa/document.hpp"
#include "ledgerml/pfa/error.hpp"
#include "ledgerml/sim/sim.hpp"
#include "ledgerml/store/store.hpp"

namespace ledgerml::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(std::string message) { throw Failure{1, std::move(message)}; }
[[noreturn]] void usage(std::string message) { throw Failure{2, std::move(message)}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LEDGERML_DATA_DIR"); env != nullptr && *env != '\0') return env;
  usage("no data directory: pass --data-dir or set LEDGERML_DATA_DIR");
}

CoinAmount parse_amount(const std::string& text, const std::string& what) {
  try {
    auto v = CoinAmount::parse(text);
    if (v.is_negative()) usage(what + " must not be negative");
    return v;
  } catch (const ArithmeticError& e) {
    usage(what + ": " + e.what());
  }
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    std::string item = csv.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
    double d = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), d);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      usage(what + ": '" + item + "' is not a number");
    out.push_back(d);
    start = end + 1;
  }
  return out;
}

// A data directory opened for one command: lock held, chain state loaded.
class Chain {
 public:
  explicit Chain(const fs::path& dir) : dir_(dir) {
    if (!fs::exists(dir / store::kGenesisFile)) fail("data directory " + dir.string() + " is not initialized");
    lock_ = std::make_unique<store::DirLock>(dir);
    genesis_ = ledger::create_genesis(ledger::parse_genesis(slurp(dir / store::kGenesisFile)));
    log_ = std::make_unique<store::BlockLog>(store::BlockLog::open(dir / store::kBlockLogFile));
    ledger::ChainState start = genesis_;
    const fs::path snap = dir / store::kSnapshotFile;
    if (fs::exists(snap)) {
      auto s = store::read_snapshot(snap);
      const auto& blocks = log_->blocks();
      if (!blocks.empty() && s.height >= blocks.front().height && s.height <= blocks.back().height &&
          blocks[s.height - blocks.front().height].state_root == ledger::compute_state_root(s))
        start = std::move(s);
    }
    if (!log_->blocks().empty() && log_->blocks().front().height == 0 &&
        !(log_->blocks().front() == ledger::genesis_block(genesis_)))
      throw store::StoreError(store::StoreErrorCode::Corruption, "stored genesis block does not match genesis.json", 0);
    state_ = store::replay(start, log_->blocks(), &cache_).state;
  }

  [[nodiscard]] const ledger::ChainState& state() const { return state_; }
  ledger::ExecutionCache& cache() { return cache_; }

  // Validates, executes and persists a one-transaction block.
  ledger::TxReceipt commit(const ledger::Transaction& tx) {
    if (auto v = ledger::validate_transaction(state_, tx, &cache_); !v.accepted)
      fail("transaction rejected: " + std::string(ledger::reject_reason_name(v.reason)) + ": " + v.detail);
    auto prop = ledger::build_block(state_, 0, state_.height + 1, {tx}, &cache_);
    log_->append(prop.block);
    state_ = std::move(prop.state);
    store::write_snapshot(dir_ / store::kSnapshotFile, state_);
    return prop.receipts.at(0);
  }

 private:
  fs::path dir_;
  std::unique_ptr<store::DirLock> lock_;
  ledger::ChainState genesis_;
  ledger::ChainState state_;
  std::unique_ptr<store::BlockLog> log_;
  ledger::ExecutionCache cache_;
};

json receipt_json(const ledger::TxReceipt& r, std::uint64_t height) {
  json j;
  j["height"] = height;
  j["outcome"] = r.committed ? "Committed" : "Aborted";
  if (!r.committed) {
    j["reason"] = contract::abort_reason_name(r.reason);
    j["detail"] = r.detail;
  }
  j["steps"] = r.steps;
  j["logs"] = r.logs;
  if (r.created_account) j["createdAccount"] = r.created_account->value;
  return j;
}

void print_receipt(std::ostream& out, bool as_json, const ledger::TxReceipt& r, std::uint64_t height) {
  if (as_json) {
    out << receipt_json(r, height).dump() << "\n";
    return;
  }
  out << "block " << height << ": " << (r.committed ? "Committed" : "Aborted");
  if (!r.committed) out << " (" << contract::abort_reason_name(r.reason) << ": " << r.detail << ")";
  out << ", " << r.steps << " steps\n";
  for (const auto& line : r.logs) out << "log: " << line << "\n";
}

ledger::Transaction next_tx(const ledger::ChainState& s, std::uint64_t sender) {
  const auto* acct = s.find(AccountId{sender});
  if (acct == nullptr) fail("unknown sender account " + std::to_string(sender));
  ledger::Transaction tx;
  tx.sender = AccountId{sender};
  tx.seq = acct->seq;
  return tx;
}

int cmd_init(const std::string& genesis_path, const std::string& dir_flag, bool as_json, std::ostream& out) {
  const fs::path dir = data_dir(dir_flag);
  const std::string text = slurp(genesis_path);
  ledger::ChainState genesis;
  try {
    genesis = ledger::create_genesis(ledger::parse_genesis(text));
  } catch (const ledger::LedgerError& e) {
    fail(std::string("invalid genesis: ") + e.what());
  }
  if (fs::exists(dir) && !(fs::is_directory(dir) && fs::is_empty(dir)))
    fail("refusing to initialize: " + dir.string() + " exists and is not an empty directory");
  fs::create_directories(dir);
  store::DirLock lock(dir);
  {
    auto log = store::BlockLog::open(dir / store::kBlockLogFile);
    log.append(ledger::genesis_block(genesis));
  }
  store::write_snapshot(dir / store::kSnapshotFile, genesis);
  store::write_file_atomic(dir / store::kGenesisFile, to_bytes(text));
  const auto root = to_hex(ledger::compute_state_root(genesis));
  if (as_json) {
    json j;
    j["dataDir"] = dir.string();
    j["height"] = 0;
    j["stateRoot"] = root;
    j["genesisHash"] = to_hex(genesis.head_hash);
    out << j.dump() << "\n";
  } else {
    out << "initialized " << dir.string() << " at height 0, state root " << root << "\n";
  }
  return 0;
}

int cmd_deploy(const std::string& source_path, std::uint64_t sender, const std::string& coins, const std::string& dir_flag,
               bool as_json, std::ostream& out) {
  const fs::path dir = data_dir(dir_flag);
  const std::string source = slurp(source_path);
  try {
    contract::parse_contract(source);
  } catch (const contract::ParseError& e) {
    fail(source_path + ":" + std::to_string(e.pos().line) + ":" + std::to_string(e.pos().column) + ": " +
         std::string(contract::parse_error_kind_name(e.kind())) + ": " + e.message());
  }
  Chain chain(dir);
  auto tx = next_tx(chain.state(), sender);
  tx.receiver = AccountId::system();
  tx.action = ledger::kDeployAction;
  tx.coins = parse_amount(coins, "--coins");
  tx.data = to_bytes(source);
  const auto receipt = chain.commit(tx);
  const auto id = receipt.created_account.value().value;
  if (as_json) {
    json j = receipt_json(receipt, chain.state().height);
    j["contract"] = id;
    out << j.dump() << "\n";
  } else {
    out << "deployed contract " << id << " in block " << chain.state().height << "\n";
  }
  return 0;
}

struct SendArgs {
  std::uint64_t to = 0;
  std::uint64_t sender = 0;
  std::int32_t action = 0;
  std::string coins = "0";
  std::string asset;
  std::string data_hex;
  std::string data_f64;
};

int cmd_send(const SendArgs& a, const std::string& dir_flag, bool as_json, std::ostream& out) {
  const fs::path dir = data_dir(dir_flag);
  ledger::Transaction proto;
  proto.receiver = AccountId{a.to};
  proto.action = a.action;
  proto.coins = parse_amount(a.coins, "--coins");
  if (!a.asset.empty()) {
    const auto colon = a.asset.rfind(':');
    if (colon == std::string::npos || colon == 0) usage("--asset must look like ID:AMOUNT");
    proto.asset = Asset{a.asset.substr(0, colon), parse_amount(a.asset.substr(colon + 1), "--asset amount")};
  }
  if (!a.data_hex.empty() && !a.data_f64.empty()) usage("give at most one of --data-hex, --data-f64");
  if (!a.data_hex.empty()) {
    try {
      proto.data = from_hex(a.data_hex);
    } catch (const DecodeError& e) {
      usage(std::string("--data-hex: ") + e.what());
    }
  }
  if (!a.data_f64.empty()) {
    for (double d : parse_doubles(a.data_f64, "--data-f64")) {
      const auto bits = std::bit_cast<std::uint64_t>(d);
      for (int k = 0; k < 8; ++k) proto.data.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
    }
  }
  Chain chain(dir);
  auto tx = next_tx(chain.state(), a.sender);
  tx.receiver = proto.receiver;
  tx.action = proto.action;
  tx.coins = proto.coins;
  tx.asset = proto.asset;
  tx.data = std::move(proto.data);
  const auto receipt = chain.commit(tx);
  print_receipt(out, as_json, receipt, chain.state().height);
  return 0;
}

int cmd_query(std::uint64_t account, const std::string& dir_flag, bool as_json, std::ostream& out) {
  Chain chain(data_dir(dir_flag));
  const auto* a = chain.state().find(AccountId{account});
  if (a == nullptr) fail("no account " + std::to_string(account));
  json j;
  j["id"] = a->id.value;
  j["coins"] = a->coins.to_string();
  json assets = json::object();
  for (const auto& [id, amount] : a->assets) assets[id] = amount.to_string();
  j["assets"] = assets;
  j["seq"] = a->seq;
  j["contract"] = a->is_contract();
  json keys = json::array();
  for (const auto& [key, _] : a->storage) keys.push_back(key);
  j["storageKeys"] = keys;
  j["height"] = chain.state().height;
  if (as_json) {
    out << j.dump() << "\n";
    return 0;
  }
  out << "account " << a->id.value << (a->is_contract() ? " (contract)" : "") << "\n";
  out << "  coins: " << a->coins.to_string() << "\n";
  for (const auto& [id, amount] : a->assets) out << "  asset " << id << ": " << amount.to_string() << "\n";
  out << "  seq: " << a->seq << "\n";
  if (a->is_contract()) {
    out << "  storage keys:";
    for (const auto& [key, _] : a->storage) out << " " << key;
    out << "\n";
  }
  return 0;
}

int cmd_sim(const std::string& config_path, const std::string& out_path, bool as_json, std::ostream& out) {
  sim::SimConfig cfg;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) usage("cannot read " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    cfg = sim::parse_sim_config(ss.str(), fs::path(config_path).parent_path());
  } catch (const sim::SimError& e) {
    usage(e.what());
  }
  const auto rep = sim::run_simulation(cfg);
  if (!out_path.empty()) store::write_file_atomic(out_path, to_bytes(rep.json));
  if (as_json) {
    out << rep.json;
  } else {
    out << (rep.converged ? "converged" : "NOT converged") << ": " << rep.chain.size() << " of " << cfg.blocks
        << " blocks finalized on " << cfg.node_count << " nodes\n";
    for (const auto& n : rep.nodes)
      out << "  node " << n.node << " height " << n.height << " root " << to_hex(n.state_root) << "\n";
    for (const auto& d : rep.divergences) out << "  divergence: " << d << "\n";
    for (const auto& r : rep.rejections) out << "  " << r << "\n";
  }
  return rep.converged ? 0 : 1;
}

int cmd_score(const std::string& model_path, const std::string& input_csv, bool hex, bool as_json, std::ostream& out) {
  std::shared_ptr<const pfa::PfaDocument> doc;
  try {
    doc = pfa::parse_pfa(slurp(model_path));
  } catch (const pfa::PfaError& e) {
    fail(std::string("model: ") + e.what());
  }
  const auto values = parse_doubles(input_csv, "--input");
  Value input;
  if (doc->input->is(pfa::Type::Kind::Double) && values.size() == 1) {
    input = Value::dbl(values[0]);
  } else {
    List items;
    for (double d : values) items.push_back(Value::dbl(d));
    input = Value::list(std::move(items));
  }
  Value output;
  std::uint64_t cost = 0;
  try {
    auto r = pfa::evaluate(*doc, input);
    output = std::move(r.value);
    cost = r.cost;
  } catch (const pfa::PfaError& e) {
    fail(e.what());
  }
  std::optional<double> prediction;
  if (output.is(Value::Kind::Dbl)) prediction = output.as_dbl();
  if (output.is(Value::Kind::Int)) prediction = static_cast<double>(output.as_int());
  if (output.is(Value::Kind::Rec)) {
    if (const Value* p = output.as_rec().find("prediction")) {
      if (p->is(Value::Kind::Dbl)) prediction = p->as_dbl();
      if (p->is(Value::Kind::Int)) prediction = static_cast<double>(p->as_int());
    }
  }
  auto bits_hex = [](double d) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(d)));
    return std::string(buf);
  };
  if (as_json) {
    json j;
    j["output"] = render_value(output);
    if (prediction) {
      j["prediction"] = format_double(*prediction);
      j["predictionBits"] = bits_hex(*prediction);
    }
    j["cost"] = cost;
    out << j.dump() << "\n";
    return 0;
  }
  if (!prediction) {
    out << render_value(output) << "\n";
  } else if (hex) {
    out << bits_hex(*prediction) << "\n";
  } else {
    out << format_double(*prediction) << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic ledger with on-chain model scoring", "ledgerml"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable JSON output");

  std::string dir;
  auto add_dir = [&](CLI::App* sub) {
    sub->add_option("--data-dir", dir, "Data directory (default: $LEDGERML_DATA_DIR)");
  };

  std::string genesis;
  auto* init = app.add_subcommand("init", "Create a data directory from a genesis file");
  init->add_option("--genesis", genesis, "Genesis JSON")->required();
  add_dir(init);

  std::string source;
  std::uint64_t sender = 0;
  std::string deploy_coins = "0";
  auto* deploy = app.add_subcommand("deploy", "Deploy a contract in a new block");
  deploy->add_option("--source", source, "QScript source file")->required();
  deploy->add_option("--sender", sender, "Deploying account")->required();
  deploy->add_option("--coins", deploy_coins, "Coins moved into the new contract");
  add_dir(deploy);

  SendArgs send_args;
  auto* send = app.add_subcommand("send", "Send a transaction in a new block and print its receipt");
  send->add_option("--to", send_args.to, "Receiver account")->required();
  send->add_option("--sender", send_args.sender, "Sending account")->required();
  send->add_option("--action", send_args.action, "Action code");
  send->add_option("--coins", send_args.coins, "Coins to transfer");
  send->add_option("--asset", send_args.asset, "Asset transfer as ID:AMOUNT");
  send->add_option("--data-hex", send_args.data_hex, "Payload bytes in hex");
  send->add_option("--data-f64", send_args.data_f64, "Payload as comma-separated doubles (little-endian binary64)");
  add_dir(send);

  std::uint64_t account = 0;
  auto* query = app.add_subcommand("query", "Show an account");
  query->add_option("--account", account, "Account id")->required();
  add_dir(query);

  std::string config;
  std::string report;
  auto* simc = app.add_subcommand("sim", "Run a multi-node simulation; exit 0 iff all nodes converge");
  simc->add_option("--config", config, "Simulation config JSON")->required();
  simc->add_option("--out", report, "Write the JSON report here");

  std::string model;
  std::string input;
  bool hex = false;
  auto* score = app.add_subcommand("score", "Score one input with a model document, off-chain");
  score->add_option("--model", model, "PFA document")->required();
  score->add_option("--input", input, "Comma-separated feature values")->required();
  score->add_flag("--hex", hex, "Print the prediction's binary64 bit pattern");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*init) return cmd_init(genesis, dir, as_json, out);
    if (*deploy) return cmd_deploy(source, sender, deploy_coins, dir, as_json, out);
    if (*send) return cmd_send(send_args, dir, as_json, out);
    if (*query) return cmd_query(account, dir, as_json, out);
    if (*simc) return cmd_sim(config, report, as_json, out);
    if (*score) return cmd_score(model, input, hex, as_json, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const store::StoreError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ledger::LedgerError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ledgerml::cli
