#include <gtest/gtest.h>

#include "ledgerml/ledger/codec.hpp"
#include "support.hpp"

using namespace ledgerml;
using namespace ledgerml::ledger;
using namespace ledgerml::testing;

namespace {

GenesisConfig small_genesis() {
  return parse_genesis(R"({"accounts": [{"id": 1, "coins": "100"}, {"id": 2, "coins": 5}],
                           "assets": [{"assetId": "GOLD", "issuance": "10", "holder": 1}], "stepLimit": 5000})");
}

RejectReason rejected(const ChainState& s, const Transaction& tx) {
  const auto v = validate_transaction(s, tx);
  EXPECT_FALSE(v.accepted);
  return v.reason;
}

LedgerErrorCode genesis_error(const std::string& json) {
  try {
    create_genesis(parse_genesis(json));
  } catch (const LedgerError& e) {
    return e.code();
  }
  ADD_FAILURE() << json;
  return LedgerErrorCode::InternalInvariantBroken;
}

const std::string kEcho = "on receive(sender, action, coins, asset, data) { log(\"got \" + coins); }";

}  // namespace

TEST(Genesis, Errors) {
  EXPECT_EQ(genesis_error("{"), LedgerErrorCode::InvalidGenesis);
  EXPECT_EQ(genesis_error(R"({"accounts": []})"), LedgerErrorCode::EmptyGenesis);
  EXPECT_EQ(genesis_error(R"({"accounts": [{"id": 1, "coins": 1}, {"id": 1, "coins": 2}]})"),
            LedgerErrorCode::DuplicateAccount);
  EXPECT_EQ(genesis_error(R"({"accounts": [{"id": 1, "coins": "-1"}]})"), LedgerErrorCode::NegativeBalance);
  EXPECT_EQ(genesis_error(R"({"accounts": [{"id": 1, "coins": 1}], "assets": [{"assetId": "G", "issuance": 1, "holder": 2}]})"),
            LedgerErrorCode::UnknownHolder);
  EXPECT_EQ(genesis_error(R"({"accounts": [{"id": 1, "coins": 1}], "assets": [{"assetId": "G", "issuance": 1, "holder": 1},
                                                                              {"assetId": "G", "issuance": 1, "holder": 1}]})"),
            LedgerErrorCode::DuplicateAsset);
}

TEST(Genesis, State) {
  const auto s = create_genesis(small_genesis());
  EXPECT_EQ(s.height, 0u);
  EXPECT_EQ(s.next_account_id, 3u);
  EXPECT_EQ(s.coin_supply, CoinAmount::from_whole(105));
  EXPECT_EQ(s.find(AccountId{1})->asset("GOLD"), CoinAmount::from_whole(10));
  EXPECT_EQ(s.step_limit, 5000u);
  EXPECT_EQ(s.head_hash, hash_block(genesis_block(s)));
  EXPECT_TRUE(check_conservation(s));
}

TEST(Ledger, ValidationReasons) {
  const auto s = create_genesis(small_genesis());
  Chain c(small_genesis());
  auto tx = c.tx(AccountId{1}, AccountId{2}, 0, CoinAmount::from_whole(1));
  EXPECT_TRUE(validate_transaction(s, tx).accepted);

  auto t = tx;
  t.sender = AccountId{9};
  EXPECT_EQ(rejected(s, t), RejectReason::UnknownSender);
  t = tx;
  t.seq = 1;
  EXPECT_EQ(rejected(s, t), RejectReason::BadSequence);
  t = tx;
  t.coins = CoinAmount::from_whole(-1);
  EXPECT_EQ(rejected(s, t), RejectReason::NegativeAmount);
  t = tx;
  t.coins = CoinAmount::from_whole(101);
  EXPECT_EQ(rejected(s, t), RejectReason::InsufficientFunds);
  t = tx;
  t.asset = Asset{"SILVER", CoinAmount::from_whole(1)};
  EXPECT_EQ(rejected(s, t), RejectReason::UnknownAsset);
  t = tx;
  t.asset = Asset{"GOLD", CoinAmount::from_whole(11)};
  EXPECT_EQ(rejected(s, t), RejectReason::InsufficientAsset);
  t = tx;
  t.asset = Asset{"", CoinAmount::from_whole(1)};
  EXPECT_EQ(rejected(s, t), RejectReason::BadAsset);
  t = tx;
  t.receiver = AccountId{77};
  EXPECT_EQ(rejected(s, t), RejectReason::UnknownReceiver);
  t = tx;
  t.receiver = AccountId{0};
  t.action = 3;
  EXPECT_EQ(rejected(s, t), RejectReason::BadReceiver);
  t = tx;
  t.data = Bytes(contract::kMaxDataBytes + 1, 0);
  EXPECT_EQ(rejected(s, t), RejectReason::DataTooLarge);
  t = c.tx(AccountId{1}, AccountId{0}, kDeployAction, {}, std::nullopt, to_bytes("on receive( {"));
  EXPECT_EQ(rejected(s, t), RejectReason::InvalidContract);
}

TEST(Ledger, DeployAndInvoke) {
  Chain c(small_genesis());
  const auto id = c.deploy(AccountId{1}, kEcho);
  EXPECT_EQ(id, AccountId{3});
  EXPECT_TRUE(c.state().find(id)->is_contract());

  const auto r = c.submit(c.tx(AccountId{2}, id, 0, CoinAmount::parse("1.5")));
  EXPECT_TRUE(r.committed);
  EXPECT_EQ(r.logs, std::vector<std::string>{"got 1.5"});
  EXPECT_GT(r.steps, 0u);
  EXPECT_EQ(c.state().find(id)->coins, CoinAmount::parse("1.5"));
  EXPECT_EQ(c.state().find(AccountId{2})->coins, CoinAmount::parse("3.5"));

  // contracts cannot originate transactions
  EXPECT_EQ(rejected(c.state(), c.tx(id, AccountId{1})), RejectReason::SenderIsContract);
}

TEST(Ledger, AbortRollsBackAllButSequence) {
  Chain c(small_genesis());
  const auto id = c.deploy(AccountId{1}, "on receive(sender, action, coins, asset, data) { put(\"k\", 1); log(\"x\"); let z = 1 / 0; }");
  const auto before = c.state();
  const auto r = c.submit(c.tx(AccountId{1}, id, 0, CoinAmount::from_whole(3), Asset{"GOLD", CoinAmount::from_whole(2)}));
  EXPECT_FALSE(r.committed);
  EXPECT_EQ(r.reason, contract::AbortReason::DivisionByZero);
  EXPECT_EQ(r.logs, std::vector<std::string>{"x"});

  auto expect = before;
  expect.find(AccountId{1})->seq += 1;
  auto after = c.state();
  after.height = expect.height;
  after.head_hash = expect.head_hash;
  EXPECT_EQ(after, expect);
}

TEST(Ledger, NestedSendsAndDepth) {
  Chain c(small_genesis());
  const auto a = c.deploy(AccountId{1}, "on receive(sender, action, coins, asset, data) { send(sender, 0, coins, none, empty); }");
  auto r = c.submit(c.tx(AccountId{1}, a, 0, CoinAmount::from_whole(1)));
  EXPECT_TRUE(r.committed) << r.detail;
  EXPECT_EQ(c.state().find(AccountId{1})->coins, CoinAmount::from_whole(100));

  // keeps sending to itself
  const auto ping = c.deploy(AccountId{1}, "on receive(sender, action, coins, asset, data) { send(self(), 0, coins, none, empty); }");
  r = c.submit(c.tx(AccountId{1}, ping, 0, CoinAmount::from_whole(1)));
  EXPECT_FALSE(r.committed);
  EXPECT_EQ(r.reason, contract::AbortReason::DepthExceeded);
  EXPECT_TRUE(check_conservation(c.state()));
}

TEST(Ledger, ApplyBlockErrors) {
  Chain c(small_genesis());
  const auto genesis = c.state();
  c.submit(c.tx(AccountId{1}, AccountId{2}, 0, CoinAmount::from_whole(1)));
  const auto good = c.blocks().back();
  EXPECT_EQ(apply_block(genesis, good).state, c.state());

  auto code_of = [&](Block b) {
    try {
      apply_block(genesis, b);
    } catch (const LedgerError& e) {
      return e.code();
    }
    return LedgerErrorCode::InternalInvariantBroken;
  };
  auto b = good;
  b.parent_hash[0] ^= 1;
  EXPECT_EQ(code_of(b), LedgerErrorCode::BadParent);
  b = good;
  b.height = 2;
  EXPECT_EQ(code_of(b), LedgerErrorCode::BadHeight);
  b = good;
  b.state_root[31] ^= 1;
  EXPECT_EQ(code_of(b), LedgerErrorCode::StateRootMismatch);
  b = good;
  b.transactions[0].seq = 5;
  EXPECT_EQ(code_of(b), LedgerErrorCode::InvalidTransactionInBlock);
  b = good;
  b.transactions.assign(kMaxBlockTransactions + 1, good.transactions[0]);
  EXPECT_EQ(code_of(b), LedgerErrorCode::TooManyTransactions);
}

TEST(Ledger, BuildBlockSkipsInvalid) {
  const auto s = create_genesis(small_genesis());
  Chain c(small_genesis());
  auto ok = c.tx(AccountId{1}, AccountId{2}, 0, CoinAmount::from_whole(1));
  auto dup = ok;
  auto next = ok;
  next.seq = 1;
  const auto p = build_block(s, 0, 10, {ok, dup, next});
  EXPECT_EQ(p.block.transactions.size(), 2u);
  ASSERT_EQ(p.skipped.size(), 1u);
  EXPECT_EQ(p.skipped[0].second.reason, RejectReason::BadSequence);
  EXPECT_EQ(p.block.state_root, compute_state_root(p.state));
}

TEST(Ledger, AssetsMoveWithTransfers) {
  Chain c(small_genesis());
  c.submit(c.tx(AccountId{1}, AccountId{2}, 0, {}, Asset{"GOLD", CoinAmount::from_whole(10)}));
  EXPECT_EQ(c.state().find(AccountId{2})->asset("GOLD"), CoinAmount::from_whole(10));
  EXPECT_TRUE(c.state().find(AccountId{1})->assets.empty());
  EXPECT_TRUE(check_conservation(c.state()));
}
