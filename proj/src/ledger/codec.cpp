#include "ledgerml/ledger/codec.hpp"

#include "ledgerml/common/sha256.hpp"

namespace ledgerml::ledger {

namespace {

void encode_amounts(ByteWriter& w, const std::map<std::string, CoinAmount>& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [id, amount] : m) {
    w.str(id);
    w.i128(amount.units());
  }
}

std::map<std::string, CoinAmount> decode_amounts(ByteReader& r) {
  std::map<std::string, CoinAmount> m;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto id = r.str();
    auto amount = CoinAmount::from_units(r.i128());
    if (!m.empty() && !(m.rbegin()->first < id)) throw DecodeError("amount map keys not strictly ascending");
    m.emplace(std::move(id), amount);
  }
  return m;
}

}  // namespace

void encode_transaction(ByteWriter& w, const Transaction& tx) {
  w.u64(tx.sender.value);
  w.u64(tx.receiver.value);
  w.i32(tx.action);
  w.i128(tx.coins.units());
  w.u8(tx.asset ? 1 : 0);
  if (tx.asset) {
    w.str(tx.asset->id);
    w.i128(tx.asset->amount.units());
  }
  w.bytes(tx.data);
  w.u64(tx.seq);
}

Transaction decode_transaction(ByteReader& r) {
  Transaction tx;
  tx.sender = AccountId{r.u64()};
  tx.receiver = AccountId{r.u64()};
  tx.action = r.i32();
  tx.coins = CoinAmount::from_units(r.i128());
  const auto flag = r.u8();
  if (flag > 1) throw DecodeError("bad asset flag");
  if (flag == 1) {
    Asset a;
    a.id = r.str();
    a.amount = CoinAmount::from_units(r.i128());
    tx.asset = std::move(a);
  }
  tx.data = r.bytes();
  tx.seq = r.u64();
  return tx;
}

Bytes encode_block(const Block& b) {
  ByteWriter w;
  w.u64(b.height);
  w.hash(b.parent_hash);
  w.u32(b.proposer);
  w.u64(b.tick);
  w.u32(static_cast<std::uint32_t>(b.transactions.size()));
  for (const auto& tx : b.transactions) encode_transaction(w, tx);
  w.hash(b.state_root);
  return std::move(w).take();
}

Block decode_block(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Block b;
  b.height = r.u64();
  b.parent_hash = r.hash();
  b.proposer = r.u32();
  b.tick = r.u64();
  const auto n = r.u32();
  if (n > kMaxBlockTransactions) throw DecodeError("block holds " + std::to_string(n) + " transactions");
  b.transactions.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) b.transactions.push_back(decode_transaction(r));
  b.state_root = r.hash();
  r.expect_done();
  return b;
}

Bytes encode_state(const ChainState& s) {
  ByteWriter w;
  w.u64(s.height);
  w.u64(s.next_account_id);
  w.u64(s.step_limit);
  w.u32(static_cast<std::uint32_t>(s.asset_registry.size()));
  for (const auto& id : s.asset_registry) w.str(id);
  w.i128(s.coin_supply.units());
  encode_amounts(w, s.asset_supply);
  w.u32(static_cast<std::uint32_t>(s.accounts.size()));
  for (const auto& [id, acct] : s.accounts) {
    w.u64(id.value);
    w.i128(acct.coins.units());
    encode_amounts(w, acct.assets);
    w.u64(acct.seq);
    w.u8(acct.contract_source ? 1 : 0);
    if (acct.contract_source) w.str(*acct.contract_source);
    w.u32(static_cast<std::uint32_t>(acct.storage.size()));
    for (const auto& [key, value] : acct.storage) {
      w.str(key);
      encode_value(w, value);
    }
  }
  return std::move(w).take();
}

ChainState decode_state(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ChainState s;
  s.height = r.u64();
  s.next_account_id = r.u64();
  s.step_limit = r.u64();
  const auto nreg = r.u32();
  for (std::uint32_t i = 0; i < nreg; ++i) {
    auto id = r.str();
    if (!s.asset_registry.empty() && !(*s.asset_registry.rbegin() < id))
      throw DecodeError("asset registry not strictly ascending");
    s.asset_registry.insert(std::move(id));
  }
  s.coin_supply = CoinAmount::from_units(r.i128());
  s.asset_supply = decode_amounts(r);
  const auto nacct = r.u32();
  for (std::uint32_t i = 0; i < nacct; ++i) {
    Account a;
    a.id = AccountId{r.u64()};
    if (!s.accounts.empty() && !(s.accounts.rbegin()->first < a.id)) throw DecodeError("accounts not strictly ascending");
    a.coins = CoinAmount::from_units(r.i128());
    a.assets = decode_amounts(r);
    a.seq = r.u64();
    const auto flag = r.u8();
    if (flag > 1) throw DecodeError("bad contract flag");
    if (flag == 1) a.contract_source = r.str();
    const auto nstore = r.u32();
    for (std::uint32_t k = 0; k < nstore; ++k) {
      auto key = r.str();
      if (!a.storage.empty() && !(a.storage.rbegin()->first < key)) throw DecodeError("storage keys not strictly ascending");
      a.storage.emplace(std::move(key), decode_value(r));
    }
    s.accounts.emplace(a.id, std::move(a));
  }
  r.expect_done();
  return s;
}

Hash32 compute_state_root(const ChainState& s) { return sha256(encode_state(s)); }

Hash32 hash_block(const Block& b) { return sha256(encode_block(b)); }

}  // namespace ledgerml::ledger
