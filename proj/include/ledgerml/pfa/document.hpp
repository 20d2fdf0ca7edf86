#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerml/common/value.hpp"

namespace ledgerml::pfa {

struct Type;
using TypePtr = std::shared_ptr<const Type>;

/// Subset schema: double | int | string | boolean | array(items) | record.
struct Type {
  enum class Kind { Double, Int, String, Boolean, Array, Record };

  Kind kind = Kind::Double;
  TypePtr items;
  std::string name;
  std::vector<std::pair<std::string, TypePtr>> fields;

  static TypePtr make(Kind k);
  static TypePtr array_of(TypePtr items);

  [[nodiscard]] bool is(Kind k) const { return kind == k; }
  [[nodiscard]] bool is_double_array() const { return kind == Kind::Array && items->is(Kind::Double); }
  [[nodiscard]] bool is_double_matrix() const { return kind == Kind::Array && items->is_double_array(); }
  [[nodiscard]] int field_index(std::string_view field) const;
};

/// Record names are labels only; equality is structural.
bool same_type(const Type& a, const Type& b);
std::string type_to_string(const Type& t);
bool conforms(const Value& v, const Type& t);

enum class Builtin {
  Add,
  Sub,
  Mul,
  Div,
  IntDiv,
  Neg,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Ne,
  And,
  Or,
  Not,
  Exp,
  Ln,
  Logit,
  Softmax,
  Relu,
  Argmax,
  Len,
  Dot,
  VecAdd,
  CastDouble,
  SimpleLayers,
};

std::string_view builtin_name(Builtin b);

struct Expr;
using ExprPtr = std::unique_ptr<const Expr>;

struct PathStep {
  bool is_field = false;
  std::string field;
  std::int64_t index = 0;  // field position for records, element index for arrays
};

struct Expr {
  enum class Kind { Literal, Input, Symbol, Cell, Let, If, Call, Attr, NewRecord, NewArray };

  Kind kind = Kind::Literal;
  TypePtr type;
  Value literal;
  std::string name;        // symbol, cell or record-type name
  std::size_t slot = 0;    // symbol slot or cell index
  Builtin builtin = Builtin::Add;
  std::vector<std::string> names;  // let binding names or record field names
  std::vector<std::size_t> slots;  // let binding slots
  std::vector<ExprPtr> args;       // let: bindings then body; if: cond/then/else; call/new: operands; attr: base
  std::vector<PathStep> path;
};

struct Cell {
  std::string name;
  TypePtr type;
  Value init;
};

struct PfaDocument {
  std::string name;
  std::optional<std::int64_t> version;
  std::optional<std::string> doc;
  TypePtr input;
  TypePtr output;
  std::vector<Cell> cells;
  ExprPtr action;
  std::size_t slot_count = 0;

  /// Stable S-expression rendering of the checked document, used for
  /// structural snapshots.
  [[nodiscard]] std::string describe() const;
};

/// Parses and fully validates a model document. Throws PfaError with a
/// JSON path on any failure.
std::shared_ptr<const PfaDocument> parse_pfa(std::string_view text);

struct EvalResult {
  Value value;
  std::uint64_t cost = 0;
};

/// Scores one input. Cost is one unit per expression node plus one per
/// multiply inside dot products; exceeding `budget` throws
/// EvalBudgetExceeded.
EvalResult evaluate(const PfaDocument& doc, const Value& input, std::optional<std::uint64_t> budget = std::nullopt);

}  // namespace ledgerml::pfa
