#include <gtest/gtest.h>

#include <random>

#include "ledgerml/contract/parser.hpp"
#include "support.hpp"

using namespace ledgerml;
using namespace ledgerml::contract;
using namespace ledgerml::testing;

namespace {

const std::string kHead = "on receive(sender, action, coins, asset, data) {\n";

struct Failure {
  ParseErrorKind kind;
  std::uint32_t line;
  std::uint32_t column;
};

Failure fails(const std::string& src) {
  try {
    parse_contract(src);
  } catch (const ParseError& e) {
    return {e.kind(), e.pos().line, e.pos().column};
  }
  ADD_FAILURE() << "parsed:\n" << src;
  return {};
}

void expect_failure(const std::string& src, ParseErrorKind kind, std::uint32_t line, std::uint32_t col) {
  const auto f = fails(src);
  EXPECT_EQ(f.kind, kind) << src;
  EXPECT_EQ(f.line, line) << src;
  EXPECT_EQ(f.column, col) << src;
}

// random well-formed expression over the handler parameters and a local
std::string random_expr(std::mt19937_64& rng, int depth) {
  static const char* atoms[] = {"1", "2.5", "3m", "\"s\"", "true", "none", "coins", "action", "x", "[1, 2]", "{a: 1}", "empty"};
  static const char* ops[] = {"+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"};
  if (depth == 0 || rng() % 4 == 0) return atoms[rng() % std::size(atoms)];
  switch (rng() % 6) {
    case 0: return "-" + random_expr(rng, depth - 1);
    case 1: return "!(" + random_expr(rng, depth - 1) + ")";
    case 2: return "(" + random_expr(rng, depth - 1) + ")";
    case 3: return "len(" + random_expr(rng, depth - 1) + ")";
    case 4: return "[" + random_expr(rng, depth - 1) + "][0]";
    default: return random_expr(rng, depth - 1) + " " + ops[rng() % std::size(ops)] + " " + random_expr(rng, depth - 1);
  }
}

}  // namespace

TEST(Parser, FixtureContractsParse) {
  for (const auto* name : {"score_demo", "loop", "limits", "forwarder", "flaky", "relay"}) {
    const auto src = read_text(fixture(std::string("contracts/") + name + ".qs"));
    EXPECT_NO_THROW(parse_contract(src)) << name;
  }
}

TEST(Parser, GoldenDumps) {
  for (const auto* name : {"score_demo", "forwarder"}) {
    const auto ast = parse_contract(read_text(fixture(std::string("contracts/") + name + ".qs")));
    EXPECT_EQ(dump(ast), read_text(fixture(std::string("contracts/") + name + ".ast"))) << name;
  }
}

TEST(Parser, ScoringContractShape) {
  const auto ast = parse_contract(read_text(fixture("contracts/score_demo.qs")));
  ASSERT_EQ(ast.constants.size(), 1u);
  EXPECT_EQ(ast.constants[0].name, "modelJson");
  EXPECT_EQ(ast.params, (std::vector<std::string>{"sender", "action", "coins", "asset", "data"}));
  ASSERT_EQ(ast.handler.size(), 4u);
  EXPECT_EQ(ast.handler[0].kind, Stmt::Kind::Let);
  EXPECT_EQ(ast.handler[0].expr->fn, HostFn::CreateModel);
  EXPECT_EQ(ast.handler[2].expr->fn, HostFn::Score);
  EXPECT_EQ(ast.handler[3].expr->fn, HostFn::Log);
}

TEST(Parser, PrettyPrintRoundTrip) {
  for (const auto* name : {"score_demo", "loop", "limits", "forwarder", "flaky", "relay"}) {
    const auto ast = parse_contract(read_text(fixture(std::string("contracts/") + name + ".qs")));
    const auto again = parse_contract(pretty_print(ast));
    EXPECT_TRUE(same_structure(ast, again)) << name;
    EXPECT_EQ(pretty_print(again), pretty_print(ast));
  }
}

TEST(Parser, RandomExpressionsRoundTrip) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1500; ++i) {
    const auto src = "const k = -4;\n" + kHead + "  let x = 0;\n  x = " + random_expr(rng, 5) + ";\n  if (" +
                     random_expr(rng, 3) + ") { log(" + random_expr(rng, 3) + "); } else if (x == k) { x = 1; }\n}\n";
    Ast ast;
    ASSERT_NO_THROW(ast = parse_contract(src)) << src;
    const auto printed = pretty_print(ast);
    Ast again;
    ASSERT_NO_THROW(again = parse_contract(printed)) << printed;
    ASSERT_TRUE(same_structure(ast, again)) << src << "\n---\n" << printed;
  }
}

TEST(Parser, PrecedenceAndAssociativity) {
  const auto a = parse_contract(kHead + "let x = 1 + 2 * 3 - 4;\n}");
  const auto b = parse_contract(kHead + "let x = (1 + (2 * 3)) - 4;\n}");
  EXPECT_TRUE(same_structure(a, b));
  const auto c = parse_contract(kHead + "let x = true || false && !true;\n}");
  const auto d = parse_contract(kHead + "let x = true || (false && (!true));\n}");
  EXPECT_TRUE(same_structure(c, d));
}

TEST(Parser, LiteralsAndEscapes) {
  const auto ast = parse_contract("const s = \"a\\n\\x41\\\"\";\nconst r = '''raw \\n''';\nconst d = -1.25m;\n" + kHead + "}");
  EXPECT_EQ(ast.constants[0].value, Value::str("a\nA\""));
  EXPECT_EQ(ast.constants[1].value, Value::str("raw \\n"));
  EXPECT_EQ(ast.constants[2].value, Value::decimal(CoinAmount::parse("-1.25")));
}

TEST(Parser, ErrorPositions) {
  expect_failure(kHead + "  let x = ;\n}", ParseErrorKind::SyntaxError, 2, 11);
  expect_failure(kHead + "  y = 1;\n}", ParseErrorKind::UnboundIdentifier, 2, 3);
  expect_failure(kHead + "  log(z);\n}", ParseErrorKind::UnboundIdentifier, 2, 7);
  expect_failure(kHead + "  coins = 1m;\n}", ParseErrorKind::SyntaxError, 2, 3);
  expect_failure(kHead + "  log(\"abc);\n}", ParseErrorKind::LexError, 2, 7);
  expect_failure(kHead + "  log(\"\\q\");\n}", ParseErrorKind::LexError, 2, 9);
  expect_failure(kHead + "}\non receive(a, b, c, d, e) {}", ParseErrorKind::DuplicateHandler, 3, 1);
  expect_failure("on receive(a, b) {}", ParseErrorKind::SyntaxError, 1, 16);
  expect_failure(kHead + "  let x = 1;\n  let x = 2;\n}", ParseErrorKind::SyntaxError, 3, 7);
  expect_failure(kHead + "  frobnicate(1);\n}", ParseErrorKind::UnboundIdentifier, 2, 3);
  expect_failure(kHead + "  log(1, 2);\n}", ParseErrorKind::SyntaxError, 2, 3);
  expect_failure(kHead + "  let x = 9223372036854775808;\n}", ParseErrorKind::LexError, 2, 11);
  expect_failure(kHead + "  let x = 1 # 2;\n}", ParseErrorKind::LexError, 2, 13);
}

TEST(Parser, NestingLimit) {
  std::string deep = kHead + "let x = ";
  for (int i = 0; i < 300; ++i) deep += "(";
  deep += "1";
  for (int i = 0; i < 300; ++i) deep += ")";
  deep += ";\n}";
  EXPECT_EQ(fails(deep).kind, ParseErrorKind::SyntaxError);
}

TEST(Parser, BlockScoping) {
  EXPECT_NO_THROW(parse_contract(kHead + "if (true) { let y = 1; } else { let y = 2; }\n}"));
  expect_failure(kHead + "if (true) { let y = 1; }\nlog(y);\n}", ParseErrorKind::UnboundIdentifier, 3, 5);
}
