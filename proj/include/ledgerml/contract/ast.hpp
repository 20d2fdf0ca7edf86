#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ledgerml/common/value.hpp"

namespace ledgerml::contract {

struct SourcePos {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  friend bool operator==(SourcePos, SourcePos) = default;
};

enum class HostFn {
  Send,
  Log,
  Get,
  Put,
  CreateModel,
  Score,
  Self,
  Balance,
  AssetBalance,
  Str,
  Len,
  Dbl,
  Int,
  Dec,
  Utf8,
  UnpackF64,
};

std::string_view host_fn_name(HostFn f);

enum class Op { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Neg, Not };

std::string_view op_symbol(Op op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { Literal, Const, Param, Local, Unary, Binary, Call, List, Record, Field, Index };

  Kind kind = Kind::Literal;
  SourcePos pos;
  Value literal;
  std::string name;          // identifier or field name
  std::size_t slot = 0;      // constant, parameter or local slot
  Op op = Op::Add;
  HostFn fn = HostFn::Log;
  std::vector<ExprPtr> kids;
  std::vector<std::string> keys;  // record literal field names
};

struct Stmt {
  enum class Kind { Let, Assign, If, While, Expr };

  Kind kind = Kind::Expr;
  SourcePos pos;
  std::string name;
  std::size_t slot = 0;
  ExprPtr expr;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  bool has_else = false;
};

struct Constant {
  std::string name;
  Value value;
};

/// Parsed and bound contract: identifiers are resolved to slots.
struct Ast {
  std::vector<Constant> constants;
  std::vector<std::string> params;
  std::vector<Stmt> handler;
  std::size_t local_count = 0;
};

/// Structural equality ignoring source positions.
bool same_structure(const Ast& a, const Ast& b);

/// Canonical source form. Binary and unary expressions are fully
/// parenthesised, so the output reparses to a structurally identical Ast.
std::string pretty_print(const Ast& ast);

/// Compact S-expression dump used for snapshot tests.
std::string dump(const Ast& ast);

}  // namespace ledgerml::contract
