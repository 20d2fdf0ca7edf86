#include <gtest/gtest.h>

#include "ledgerml/contract/host.hpp"
#include "ledgerml/contract/parser.hpp"
#include "support.hpp"

using namespace ledgerml;
using namespace ledgerml::contract;
using namespace ledgerml::testing;

namespace {

class FakeView : public LedgerView {
 public:
  std::map<std::uint64_t, CoinAmount> coins;
  std::map<std::pair<std::uint64_t, std::string>, CoinAmount> assets;
  std::map<std::string, Value> store;

  bool account_exists(AccountId id) const override { return coins.count(id.value) > 0; }
  std::optional<CoinAmount> coin_balance(AccountId id) const override {
    auto it = coins.find(id.value);
    if (it == coins.end()) return std::nullopt;
    return it->second;
  }
  CoinAmount asset_balance(AccountId id, std::string_view asset) const override {
    auto it = assets.find({id.value, std::string(asset)});
    return it == assets.end() ? CoinAmount{} : it->second;
  }
  std::optional<Value> storage(AccountId, std::string_view key) const override {
    auto it = store.find(std::string(key));
    if (it == store.end()) return std::nullopt;
    return it->second;
  }
};

struct Harness {
  FakeView view;
  InvocationInput in;
  ExecutionLimits limits;
  ModelCache cache;

  Harness() {
    view.coins[1] = CoinAmount::from_whole(100);
    view.coins[9] = CoinAmount::from_whole(50);
    view.assets[{9, "GOLD"}] = CoinAmount::from_whole(3);
    in.self = AccountId{9};
    in.sender = AccountId{1};
    in.action = 4;
    in.coins = CoinAmount::from_whole(5);
  }

  ExecutionOutcome body(const std::string& stmts) {
    return execute_receive(parse_contract("on receive(sender, action, coins, asset, data) {\n" + stmts + "\n}"), view, in,
                           limits, &cache);
  }
  ExecutionOutcome source(const std::string& src) { return execute_receive(parse_contract(src), view, in, limits, &cache); }
};

std::string logged(const std::string& expr) {
  Harness r;
  auto out = r.body("log(\"\" + (" + expr + "));");
  if (!out.committed) return "abort:" + std::string(abort_reason_name(out.reason));
  return out.logs.at(0);
}

AbortReason aborts(const std::string& stmts) {
  Harness r;
  auto out = r.body(stmts);
  EXPECT_FALSE(out.committed) << stmts;
  return out.reason;
}

}  // namespace

TEST(Interpreter, ArithmeticAndRendering) {
  EXPECT_EQ(logged("1 + 2 * 3"), "7");
  EXPECT_EQ(logged("7 / 2"), "3");
  EXPECT_EQ(logged("-7 % 3"), "-1");
  EXPECT_EQ(logged("1.5 + 2.0"), "3.5");
  EXPECT_EQ(logged("2.0"), "2.0");
  EXPECT_EQ(logged("0.1 + 0.2"), "0.30000000000000004");
  EXPECT_EQ(logged("1.10m + 2m"), "3.1");
  EXPECT_EQ(logged("3m * 2"), "6.0");
  EXPECT_EQ(logged("10m / 4"), "2.5");
  EXPECT_EQ(logged("[1, \"a\"] + [true]"), "[1, a, true]");
  EXPECT_EQ(logged("{a: 1, b: none}"), "{a: 1, b: none}");
  EXPECT_EQ(logged("utf8(\"AB\")"), "0x4142");
  EXPECT_EQ(logged("len(\"abc\") + len([1]) + len(utf8(\"xy\"))"), "6");
}

TEST(Interpreter, Comparisons) {
  EXPECT_EQ(logged("1 < 2 && \"a\" < \"b\" && 1m <= 1m"), "true");
  EXPECT_EQ(logged("[1, 2] == [1, 2]"), "true");
  EXPECT_EQ(logged("1 == 1.0"), "false");
  EXPECT_EQ(logged("none == none"), "true");
  EXPECT_EQ(logged("false && (1 / 0 == 0)"), "false");
  EXPECT_EQ(logged("true || (1 / 0 == 0)"), "true");
}

TEST(Interpreter, Conversions) {
  EXPECT_EQ(logged("dbl(1.25m)"), "1.25");
  EXPECT_EQ(logged("dec(0.1)"), "0.100000000000000006");
  EXPECT_EQ(logged("dec(0.5)"), "0.5");
  EXPECT_EQ(logged("int(2.9)"), "2");
  EXPECT_EQ(logged("int(-2.9)"), "-2");
  EXPECT_EQ(logged("str(12) + str(1.0)"), "121.0");
  EXPECT_EQ(logged("unpackF64(utf8(\"\\x00\\x00\\x00\\x00\\x00\\x00\\xf0\\x3f\"))"), "[1.0]");
}

TEST(Interpreter, Faults) {
  EXPECT_EQ(aborts("let x = 1 / 0;"), AbortReason::DivisionByZero);
  EXPECT_EQ(aborts("let x = 1.0 / 0.0;"), AbortReason::DivisionByZero);
  EXPECT_EQ(aborts("let x = 9223372036854775807 + 1;"), AbortReason::NumericFault);
  EXPECT_EQ(aborts("let x = 1e308 * 10.0;"), AbortReason::NumericFault);
  EXPECT_EQ(aborts("let x = 1 + 1.0;"), AbortReason::TypeError);
  EXPECT_EQ(aborts("let x = 1.0 % 2.0;"), AbortReason::TypeError);
  EXPECT_EQ(aborts("if (1) { }"), AbortReason::TypeError);
  EXPECT_EQ(aborts("let x = [1][3];"), AbortReason::IndexOutOfRange);
  EXPECT_EQ(aborts("let x = {a: 1}.b;"), AbortReason::FieldNotFound);
  EXPECT_EQ(aborts("let x = unpackF64(utf8(\"abc\"));"), AbortReason::TypeError);
  EXPECT_EQ(aborts("let x = 1m * 1.0;"), AbortReason::TypeError);
}

TEST(Interpreter, ParamsAreBound) {
  Harness r;
  r.in.asset = Asset{"GOLD", CoinAmount::from_whole(2)};
  r.in.data = {1, 2, 3};
  auto out = r.body("log(\"\" + sender + \" \" + action + \" \" + coins + \" \" + asset.id + \" \" + asset.amount + \" \" + data + \" \" + self());");
  ASSERT_TRUE(out.committed);
  EXPECT_EQ(out.logs[0], "1 4 5.0 GOLD 2.0 0x010203 9");
}

TEST(Interpreter, StepCountingIsExact) {
  Harness r;
  // let: stmt 1 + literal 1; while: stmt 1 + 3 per check * 4 checks;
  // body: 3 iterations of stmt 1 + (+ 1, local 1, literal 1)
  auto out = r.body("let i = 0;\nwhile (i < 3) { i = i + 1; }");
  ASSERT_TRUE(out.committed);
  EXPECT_EQ(out.steps, 2u + 1u + 3u * 4u + 3u * 4u);
}

TEST(Interpreter, StepLimitIsExact) {
  Harness r;
  r.limits.step_limit = 777;
  auto out = r.body("while (true) { }");
  EXPECT_FALSE(out.committed);
  EXPECT_EQ(out.reason, AbortReason::StepLimit);
  EXPECT_EQ(out.steps, 777u);
}

TEST(Interpreter, StorageOverlay) {
  Harness r;
  r.view.store["a"] = Value::integer(41);
  r.view.store["gone"] = Value::str("x");
  auto out = r.body("put(\"a\", get(\"a\") + 1);\nput(\"gone\", none);\nput(\"b\", [1m, {k: true}]);\nlog(\"\" + get(\"a\") + get(\"gone\") + get(\"zz\"));");
  ASSERT_TRUE(out.committed) << out.detail;
  EXPECT_EQ(out.logs[0], "42nonenone");
  EXPECT_EQ(out.overlay.at("a"), Value::integer(42));
  EXPECT_FALSE(out.overlay.at("gone").has_value());
  EXPECT_TRUE(out.overlay.count("b"));
  EXPECT_EQ(aborts("put(\"m\", createModel(\"PFA\", \"{}\"));"), AbortReason::ModelParseError);
}

TEST(Interpreter, ModelHandlesCannotBeStored) {
  Harness r;
  const auto doc = read_text(fixture("models/identity.json"));
  auto out = r.source("const m = '''" + doc + "''';\non receive(sender, action, coins, asset, data) { put(\"m\", createModel(\"PFA\", m)); }");
  EXPECT_EQ(out.reason, AbortReason::TypeError);
}

TEST(Interpreter, SendChecks) {
  Harness r;
  auto ok = r.body("send(sender, 2, 30m, {id: \"GOLD\", amount: 1m}, utf8(\"hi\"));\nsend(sender, 0, 20m, none, empty);");
  ASSERT_TRUE(ok.committed) << ok.detail;
  ASSERT_EQ(ok.sends.size(), 2u);
  EXPECT_EQ(ok.sends[0].receiver, AccountId{1});
  EXPECT_EQ(ok.sends[0].action, 2);
  EXPECT_EQ(ok.sends[0].asset->id, "GOLD");
  EXPECT_EQ(ok.sends[0].data, to_bytes("hi"));

  EXPECT_EQ(aborts("send(sender, 0, 30m, none, empty);\nsend(sender, 0, 21m, none, empty);"), AbortReason::OverSpend);
  EXPECT_EQ(aborts("send(sender, 0, 0m, {id: \"GOLD\", amount: 4m}, empty);"), AbortReason::OverSpend);
  EXPECT_EQ(aborts("send(sender, 0, -1m, none, empty);"), AbortReason::NegativeAmount);
  EXPECT_EQ(aborts("send(0, 0, 1m, none, empty);"), AbortReason::BadReceiver);
  EXPECT_EQ(aborts("send(12345, 0, 1m, none, empty);"), AbortReason::BadReceiver);
  EXPECT_EQ(aborts("send(sender, 0, 1, none, empty);"), AbortReason::TypeError);
}

TEST(Interpreter, AbortKeepsLogsDropsEffects) {
  Harness r;
  auto out = r.body("put(\"k\", 1);\nsend(sender, 0, 1m, none, empty);\nlog(\"before\");\nlet x = 1 / 0;");
  EXPECT_FALSE(out.committed);
  EXPECT_EQ(out.logs, std::vector<std::string>{"before"});
  EXPECT_TRUE(out.sends.empty());
  EXPECT_TRUE(out.overlay.empty());
}

TEST(Interpreter, ScoringThroughHost) {
  Harness r;
  const auto oracle = read_json(fixture("oracle/score_demo.json"));
  r.in.data = from_hex(oracle["dataHex"].get<std::string>());
  auto out = r.source(read_text(fixture("contracts/score_demo.qs")));
  ASSERT_TRUE(out.committed) << out.detail;
  EXPECT_EQ(out.logs, std::vector<std::string>{oracle["log"].get<std::string>()});
  EXPECT_EQ(r.cache.size(), 1u);

  // cached parse is charged the same
  auto again = r.source(read_text(fixture("contracts/score_demo.qs")));
  EXPECT_EQ(again.steps, out.steps);
  EXPECT_EQ(again.canonical(), out.canonical());
}

TEST(Interpreter, ScoreOutputMapping) {
  Harness r;
  const auto identity = read_text(fixture("models/identity.json"));
  auto out = r.source("const m = '''" + identity + "''';\non receive(sender, action, coins, asset, data) {\n"
                      "let sc = score(createModel(\"PFA\", m), 2.5);\nlog(\"\" + sc.prediction + \" \" + sc);\n}");
  ASSERT_TRUE(out.committed) << out.detail;
  EXPECT_EQ(out.logs[0], "2.5 {prediction: 2.5}");

  const auto softmax = R"({"input":{"type":"array","items":"double"},"output":{"type":"array","items":"double"},"action":{"m.link.softmax":"input"}})";
  auto bad = r.source(std::string("const m = '''") + softmax + "''';\non receive(sender, action, coins, asset, data) {\n"
                      "let sc = score(createModel(\"PFA\", m), [0.0, 0.0]);\n}");
  EXPECT_EQ(bad.reason, AbortReason::ModelOutputUnsupported);
}

TEST(Interpreter, ModelErrors) {
  EXPECT_EQ(aborts("let m = createModel(\"PMML\", \"<x/>\");"), AbortReason::UnsupportedModelLanguage);
  EXPECT_EQ(aborts("let m = createModel(\"PFA\", \"not json\");"), AbortReason::ModelParseError);
  EXPECT_EQ(aborts("let s = score(3, [1.0]);"), AbortReason::BadModelHandle);
  Harness r;
  const auto linear = read_text(fixture("models/linear.json"));
  auto mismatch = r.source("const m = '''" + linear + "''';\non receive(sender, action, coins, asset, data) {\n"
                           "let sc = score(createModel(\"PFA\", m), [\"a\"]);\n}");
  EXPECT_EQ(mismatch.reason, AbortReason::InputSchemaMismatch);
  auto dims = r.source("const m = '''" + linear + "''';\non receive(sender, action, coins, asset, data) {\n"
                       "let sc = score(createModel(\"PFA\", m), [1.0]);\n}");
  EXPECT_EQ(dims.reason, AbortReason::ModelEvalError);
}

TEST(Interpreter, ScoringBudgetCountsAgainstSteps) {
  Harness r;
  const auto oracle = read_json(fixture("oracle/score_demo.json"));
  r.in.data = from_hex(oracle["dataHex"].get<std::string>());
  auto full = r.source(read_text(fixture("contracts/score_demo.qs")));
  ASSERT_TRUE(full.committed);
  r.limits.step_limit = full.steps - 2;
  auto cut = r.source(read_text(fixture("contracts/score_demo.qs")));
  EXPECT_EQ(cut.reason, AbortReason::StepLimit);
  EXPECT_EQ(cut.steps, full.steps - 2);
}

TEST(Interpreter, BalanceQueries) {
  EXPECT_EQ(logged("balance(self())"), "50.0");
  EXPECT_EQ(logged("balance(777)"), "none");
  EXPECT_EQ(logged("assetBalance(self(), \"GOLD\")"), "3.0");
  EXPECT_EQ(logged("assetBalance(self(), \"TIN\")"), "0.0");
}
