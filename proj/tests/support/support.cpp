#include "support.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace ledgerml::testing {

std::filesystem::path fixtures_dir() { return LEDGERML_FIXTURES_DIR; }

std::filesystem::path fixture(const std::string& rel) { return fixtures_dir() / rel; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::filesystem::path& p) { return Json::parse(read_text(p)); }

std::uint64_t bits_of(double d) { return std::bit_cast<std::uint64_t>(d); }
double from_bits(std::uint64_t b) { return std::bit_cast<double>(b); }

std::string hex_bits(double d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits_of(d)));
  return buf;
}

double parse_hex_bits(const std::string& hex) { return from_bits(std::stoull(hex, nullptr, 16)); }

std::uint64_t ulp_distance(double a, double b) {
  auto key = [](double x) -> std::int64_t {
    const auto u = bits_of(x);
    const auto mag = static_cast<std::int64_t>(u & 0x7fffffffffffffffULL);
    return (u >> 63) ? -mag : mag;
  };
  const auto ka = key(a);
  const auto kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka - kb) : static_cast<std::uint64_t>(kb - ka);
}

Json bits_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Dbl: return hex_bits(v.as_dbl());
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Str: return v.as_str();
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::List: {
      Json out = Json::array();
      for (const auto& e : v.as_list()) out.push_back(bits_json(e));
      return out;
    }
    case Value::Kind::Rec: {
      Json out = Json::object();
      const auto& r = v.as_rec();
      for (std::size_t i = 0; i < r.size(); ++i) out[r.keys[i]] = bits_json(r.values[i]);
      return out;
    }
    default: throw std::runtime_error("unexpected model output kind");
  }
}

Bytes pack_f64(const std::vector<double>& v) {
  Bytes out;
  for (double d : v) {
    auto b = bits_of(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(b >> (8 * i)));
  }
  return out;
}

TempDir::TempDir() {
  auto tmpl = (std::filesystem::temp_directory_path() / "ledgerml-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Chain::Chain(const ledger::GenesisConfig& genesis) : state_(ledger::create_genesis(genesis)) {}

ledger::TxReceipt Chain::submit(ledger::Transaction tx) {
  const auto verdict = ledger::validate_transaction(state_, tx, &cache_);
  if (!verdict.accepted) throw ledger::LedgerError(0, verdict.reason, verdict.detail);
  auto proposal = ledger::build_block(state_, 0, state_.height + 1, {tx}, &cache_);
  state_ = std::move(proposal.state);
  blocks_.push_back(std::move(proposal.block));
  return proposal.receipts.at(0);
}

AccountId Chain::deploy(AccountId sender, const std::string& source) {
  auto r = submit(tx(sender, AccountId::system(), ledger::kDeployAction, {}, std::nullopt, to_bytes(source)));
  if (!r.created_account) throw std::runtime_error("deploy did not create an account");
  return *r.created_account;
}

ledger::Transaction Chain::tx(AccountId sender, AccountId receiver, std::int32_t action, CoinAmount coins,
                              std::optional<Asset> asset, Bytes data) const {
  ledger::Transaction t;
  t.sender = sender;
  t.receiver = receiver;
  t.action = action;
  t.coins = coins;
  t.asset = std::move(asset);
  t.data = std::move(data);
  const auto* acct = state_.find(sender);
  t.seq = acct ? acct->seq : 0;
  return t;
}

ledger::GenesisConfig demo_genesis() { return ledger::parse_genesis(read_text(fixture("genesis/demo.json"))); }

sim::SimConfig demo_sim_config() {
  return sim::parse_sim_config(read_text(fixture("sim/demo.json")), fixture("sim"));
}

}  // namespace ledgerml::testing
