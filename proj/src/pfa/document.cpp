#include "ledgerml/pfa/document.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "ledgerml/pfa/error.hpp"

namespace ledgerml::pfa {

using Json = nlohmann::ordered_json;

TypePtr Type::make(Kind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

TypePtr Type::array_of(TypePtr items) {
  auto t = std::make_shared<Type>();
  t->kind = Kind::Array;
  t->items = std::move(items);
  return t;
}

int Type::field_index(std::string_view field) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].first == field) return static_cast<int>(i);
  return -1;
}

bool same_type(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Type::Kind::Array) return same_type(*a.items, *b.items);
  if (a.kind == Type::Kind::Record) {
    if (a.fields.size() != b.fields.size()) return false;
    for (std::size_t i = 0; i < a.fields.size(); ++i)
      if (a.fields[i].first != b.fields[i].first || !same_type(*a.fields[i].second, *b.fields[i].second))
        return false;
  }
  return true;
}

std::string type_to_string(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Double: return "double";
    case Type::Kind::Int: return "int";
    case Type::Kind::String: return "string";
    case Type::Kind::Boolean: return "boolean";
    case Type::Kind::Array: return "array<" + type_to_string(*t.items) + ">";
    case Type::Kind::Record: {
      std::string out = "record " + t.name + "{";
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        if (i) out += ", ";
        out += t.fields[i].first + ": " + type_to_string(*t.fields[i].second);
      }
      return out + "}";
    }
  }
  return "?";
}

bool conforms(const Value& v, const Type& t) {
  switch (t.kind) {
    case Type::Kind::Double: return v.is(Value::Kind::Dbl);
    case Type::Kind::Int: return v.is(Value::Kind::Int);
    case Type::Kind::String: return v.is(Value::Kind::Str);
    case Type::Kind::Boolean: return v.is(Value::Kind::Bool);
    case Type::Kind::Array:
      return v.is(Value::Kind::List) &&
             std::all_of(v.as_list().begin(), v.as_list().end(), [&](const Value& e) { return conforms(e, *t.items); });
    case Type::Kind::Record: {
      if (!v.is(Value::Kind::Rec)) return false;
      const auto& rec = v.as_rec();
      if (rec.size() != t.fields.size()) return false;
      for (std::size_t i = 0; i < rec.size(); ++i)
        if (rec.keys[i] != t.fields[i].first || !conforms(rec.values[i], *t.fields[i].second)) return false;
      return true;
    }
  }
  return false;
}

namespace {

struct BuiltinInfo {
  std::string_view name;
  Builtin id;
  std::size_t arity;
};

constexpr std::array<BuiltinInfo, 26> kBuiltins = {{
    {"+", Builtin::Add, 2},
    {"-", Builtin::Sub, 2},
    {"*", Builtin::Mul, 2},
    {"/", Builtin::Div, 2},
    {"//", Builtin::IntDiv, 2},
    {"u-", Builtin::Neg, 1},
    {"<", Builtin::Lt, 2},
    {"<=", Builtin::Le, 2},
    {">", Builtin::Gt, 2},
    {">=", Builtin::Ge, 2},
    {"==", Builtin::Eq, 2},
    {"!=", Builtin::Ne, 2},
    {"&&", Builtin::And, 2},
    {"||", Builtin::Or, 2},
    {"!", Builtin::Not, 1},
    {"m.exp", Builtin::Exp, 1},
    {"m.ln", Builtin::Ln, 1},
    {"m.link.logit", Builtin::Logit, 1},
    {"m.link.softmax", Builtin::Softmax, 1},
    {"m.link.relu", Builtin::Relu, 1},
    {"a.argmax", Builtin::Argmax, 1},
    {"a.len", Builtin::Len, 1},
    {"la.dot", Builtin::Dot, 2},
    {"la.add", Builtin::VecAdd, 2},
    {"cast.double", Builtin::CastDouble, 1},
    {"model.neural.simpleLayers", Builtin::SimpleLayers, 2},
}};

const BuiltinInfo* find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return &b;
  return nullptr;
}

}  // namespace

std::string_view builtin_name(Builtin b) {
  for (const auto& info : kBuiltins)
    if (info.id == b) return info.name;
  return "?";
}

namespace {

constexpr int kMaxDepth = 64;

const TypePtr kDouble = Type::make(Type::Kind::Double);
const TypePtr kInt = Type::make(Type::Kind::Int);
const TypePtr kString = Type::make(Type::Kind::String);
const TypePtr kBoolean = Type::make(Type::Kind::Boolean);
const TypePtr kDoubleArray = Type::array_of(kDouble);
const TypePtr kDoubleMatrix = Type::array_of(kDoubleArray);

std::string join(const std::string& path, std::string_view key) { return path.empty() ? std::string(key) : path + "/" + std::string(key); }
std::string join(const std::string& path, std::size_t idx) { return join(path, std::to_string(idx)); }

[[noreturn]] void schema_error(const std::string& path, std::string detail) {
  throw PfaError(ErrorKind::SchemaError, std::move(detail), path);
}

[[noreturn]] void type_error(const std::string& path, std::string detail) {
  throw PfaError(ErrorKind::TypeError, std::move(detail), path);
}

TypePtr parse_schema(const Json& j, const std::string& path, int depth) {
  if (depth > 4 + 1) schema_error(path, "array nesting deeper than 4");
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "double") return kDouble;
    if (s == "int") return kInt;
    if (s == "string") return kString;
    if (s == "boolean") return kBoolean;
    schema_error(path, "unsupported primitive type '" + s + "'");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) schema_error(path, "schema must be a type name or object with 'type'");
  const auto& kind = j["type"].get_ref<const std::string&>();
  if (kind == "array") {
    for (const auto& [k, _] : j.items())
      if (k != "type" && k != "items") schema_error(path, "unexpected key '" + k + "' in array schema");
    if (!j.contains("items")) schema_error(path, "array schema needs 'items'");
    return Type::array_of(parse_schema(j["items"], join(path, "items"), depth + 1));
  }
  if (kind == "record") {
    for (const auto& [k, _] : j.items())
      if (k != "type" && k != "name" && k != "fields" && k != "doc") schema_error(path, "unexpected key '" + k + "' in record schema");
    if (!j.contains("name") || !j["name"].is_string()) schema_error(path, "record schema needs a string 'name'");
    if (!j.contains("fields") || !j["fields"].is_array()) schema_error(path, "record schema needs a 'fields' array");
    auto t = std::make_shared<Type>();
    t->kind = Type::Kind::Record;
    t->name = j["name"].get<std::string>();
    std::size_t i = 0;
    for (const auto& f : j["fields"]) {
      const auto fpath = join(join(path, "fields"), i++);
      if (!f.is_object() || !f.contains("name") || !f["name"].is_string() || !f.contains("type"))
        schema_error(fpath, "record field needs 'name' and 'type'");
      auto fname = f["name"].get<std::string>();
      if (t->field_index(fname) >= 0) schema_error(fpath, "duplicate record field '" + fname + "'");
      t->fields.emplace_back(std::move(fname), parse_schema(f["type"], join(fpath, "type"), depth));
    }
    return t;
  }
  if (kind == "double" || kind == "int" || kind == "string" || kind == "boolean") return parse_schema(j["type"], path, depth);
  schema_error(path, "unsupported schema type '" + kind + "'");
}

double require_finite_json(const Json& j, const std::string& path) {
  const double d = j.get<double>();
  if (!std::isfinite(d)) type_error(path, "non-finite number");
  return d;
}


ExprPtr literal(Value v, TypePtr t, bool flexible = false) {
  auto node = std::make_unique<Expr>();
  node->kind = Expr::Kind::Literal;
  node->literal = std::move(v);
  node->type = std::move(t);
  node->slot = flexible ? 1 : 0;
  return node;
}

// Bare integer literals adopt double type where a double is required.
ExprPtr coerce(ExprPtr e, const Type& expected) {
  if (e->kind == Expr::Kind::Literal && e->slot == 1 && expected.is(Type::Kind::Double))
    return literal(Value::dbl(static_cast<double>(e->literal.as_int())), kDouble);
  return e;
}


Value json_to_value(const Json& j, const Type& t, const std::string& path) {
  auto mismatch = [&]() -> Value { type_error(path, "value does not match " + type_to_string(t)); };
  switch (t.kind) {
    case Type::Kind::Double:
      if (!j.is_number()) return mismatch();
      return Value::dbl(require_finite_json(j, path));
    case Type::Kind::Int:
      if (!j.is_number_integer()) return mismatch();
      if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) return mismatch();
      return Value::integer(j.get<std::int64_t>());
    case Type::Kind::String:
      if (!j.is_string()) return mismatch();
      return Value::str(j.get<std::string>());
    case Type::Kind::Boolean:
      if (!j.is_boolean()) return mismatch();
      return Value::boolean(j.get<bool>());
    case Type::Kind::Array: {
      if (!j.is_array()) return mismatch();
      List items;
      std::size_t i = 0;
      for (const auto& e : j) items.push_back(json_to_value(e, *t.items, join(path, i++)));
      return Value::list(std::move(items));
    }
    case Type::Kind::Record: {
      if (!j.is_object()) return mismatch();
      Record rec;
      for (const auto& [fname, ftype] : t.fields) {
        if (!j.contains(fname)) type_error(path, "missing record field '" + fname + "'");
        rec.keys.push_back(fname);
        rec.values.push_back(json_to_value(j[fname], *ftype, join(path, fname)));
      }
      if (j.size() != t.fields.size()) type_error(path, "record value has extra fields");
      return Value::record(std::move(rec));
    }
  }
  return mismatch();
}

class Checker {
 public:
  explicit Checker(PfaDocument& doc) : doc_(doc) {}

  ExprPtr action(const Json& j, const std::string& path) {
    if (!j.is_array()) return expr(j, path, 0);
    if (j.empty()) schema_error(path, "action list is empty");
    return sequence(j, 0, path);
  }

 private:
  struct Binding {
    std::string name;
    std::size_t slot;
    TypePtr type;
  };

  // Action list: leading {"let": ...} entries scope over the remainder.
  ExprPtr sequence(const Json& list, std::size_t index, const std::string& path) {
    const auto ipath = join(path, index);
    const auto& item = list[index];
    if (index + 1 == list.size()) return expr(item, ipath, 0);
    if (!item.is_object() || item.size() != 1 || !item.contains("let"))
      schema_error(ipath, "only 'let' entries may precede the final action expression");
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Let;
    const auto mark = scope_.size();
    bind_all(item["let"], join(ipath, "let"), *node, 0);
    node->args.push_back(sequence(list, index + 1, path));
    node->type = node->args.back()->type;
    scope_.resize(mark);
    return node;
  }

  void bind_all(const Json& bindings, const std::string& path, Expr& node, int depth) {
    if (!bindings.is_object() || bindings.empty()) schema_error(path, "'let' needs a non-empty object of bindings");
    std::vector<Binding> fresh;
    for (const auto& [name, value] : bindings.items()) {
      if (name == "input") schema_error(join(path, name), "'input' cannot be rebound");
      auto e = expr(value, join(path, name), depth + 1);
      const auto slot = doc_.slot_count++;
      node.names.push_back(name);
      node.slots.push_back(slot);
      fresh.push_back({name, slot, e->type});
      node.args.push_back(std::move(e));
    }
    // Bindings become visible together, after all right-hand sides.
    for (auto& b : fresh) scope_.push_back(std::move(b));
  }

  ExprPtr expr(const Json& j, const std::string& path, int depth) {
    if (depth > kMaxDepth) schema_error(path, "expression nesting too deep");
    if (j.is_number_integer()) {
      if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        type_error(path, "integer literal out of range");
      return literal(Value::integer(j.get<std::int64_t>()), kInt, true);
    }
    if (j.is_number_float()) return literal(Value::dbl(require_finite_json(j, path)), kDouble);
    if (j.is_boolean()) return literal(Value::boolean(j.get<bool>()), kBoolean);
    if (j.is_string()) return symbol(j.get<std::string>(), path);
    if (j.is_null()) schema_error(path, "null is not an expression");
    if (j.is_array()) schema_error(path, "bare arrays are not expressions; use {\"new\": [...], \"type\": ...}");

    if (j.contains("string") && j.size() == 1) {
      if (!j["string"].is_string()) schema_error(path, "'string' literal must hold a JSON string");
      return literal(Value::str(j["string"].get<std::string>()), kString);
    }
    if (j.contains("double") && j.size() == 1) {
      if (!j["double"].is_number()) schema_error(path, "'double' literal must hold a number");
      return literal(Value::dbl(require_finite_json(j["double"], path)), kDouble);
    }
    if (j.contains("int") && j.size() == 1) {
      if (!j["int"].is_number_integer()) schema_error(path, "'int' literal must hold an integer");
      return literal(Value::integer(j["int"].get<std::int64_t>()), kInt);
    }
    if (j.contains("value") && j.contains("type") && j.size() == 2) {
      auto t = parse_schema(j["type"], join(path, "type"), 0);
      return literal(json_to_value(j["value"], *t, join(path, "value")), t);
    }
    if (j.contains("cell")) return cell(j, path, depth);
    if (j.contains("let")) return let_in(j, path, depth);
    if (j.contains("if")) return if_expr(j, path, depth);
    if (j.contains("attr")) return attr(j, path, depth);
    if (j.contains("new")) return construct(j, path, depth);
    if (j.size() != 1) schema_error(path, "expression object must have exactly one key");
    return call(j.begin().key(), j.begin().value(), path, depth);
  }

  ExprPtr symbol(const std::string& name, const std::string& path) {
    auto node = std::make_unique<Expr>();
    if (name == "input") {
      node->kind = Expr::Kind::Input;
      node->type = doc_.input;
      return node;
    }
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->name == name) {
        node->kind = Expr::Kind::Symbol;
        node->name = name;
        node->slot = it->slot;
        node->type = it->type;
        return node;
      }
    }
    throw PfaError(ErrorKind::UnboundSymbol, "symbol '" + name + "' is not bound", path);
  }

  ExprPtr cell(const Json& j, const std::string& path, int depth) {
    for (const auto& [k, _] : j.items())
      if (k != "cell" && k != "path") schema_error(path, "unexpected key '" + k + "' in cell reference");
    if (!j["cell"].is_string()) schema_error(path, "'cell' must name a cell");
    const auto name = j["cell"].get<std::string>();
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Cell;
    node->name = name;
    bool found = false;
    for (std::size_t i = 0; i < doc_.cells.size(); ++i) {
      if (doc_.cells[i].name == name) {
        node->slot = i;
        node->type = doc_.cells[i].type;
        found = true;
      }
    }
    if (!found) throw PfaError(ErrorKind::UnboundSymbol, "cell '" + name + "' is not declared", path);
    if (!j.contains("path")) return node;
    return with_path(std::move(node), j["path"], join(path, "path"), depth);
  }

  ExprPtr let_in(const Json& j, const std::string& path, int depth) {
    if (j.size() != 2 || !j.contains("in")) schema_error(path, "inline 'let' needs exactly 'let' and 'in'");
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Let;
    const auto mark = scope_.size();
    bind_all(j["let"], join(path, "let"), *node, depth);
    node->args.push_back(expr(j["in"], join(path, "in"), depth + 1));
    node->type = node->args.back()->type;
    scope_.resize(mark);
    return node;
  }

  ExprPtr if_expr(const Json& j, const std::string& path, int depth) {
    for (const auto& [k, _] : j.items())
      if (k != "if" && k != "then" && k != "else") schema_error(path, "unexpected key '" + k + "' in 'if'");
    if (!j.contains("then") || !j.contains("else")) schema_error(path, "'if' needs both 'then' and 'else'");
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::If;
    auto cond = expr(j["if"], join(path, "if"), depth + 1);
    if (!cond->type->is(Type::Kind::Boolean)) type_error(join(path, "if"), "condition must be boolean");
    auto then_e = expr(j["then"], join(path, "then"), depth + 1);
    auto else_e = expr(j["else"], join(path, "else"), depth + 1);
    then_e = coerce(std::move(then_e), *else_e->type);
    else_e = coerce(std::move(else_e), *then_e->type);
    if (!same_type(*then_e->type, *else_e->type))
      type_error(path, "branches differ: " + type_to_string(*then_e->type) + " vs " + type_to_string(*else_e->type));
    node->type = then_e->type;
    node->args.push_back(std::move(cond));
    node->args.push_back(std::move(then_e));
    node->args.push_back(std::move(else_e));
    return node;
  }

  ExprPtr attr(const Json& j, const std::string& path, int depth) {
    if (j.size() != 2 || !j.contains("path")) schema_error(path, "'attr' needs exactly 'attr' and 'path'");
    auto base = expr(j["attr"], join(path, "attr"), depth + 1);
    return with_path(std::move(base), j["path"], join(path, "path"), depth);
  }

  ExprPtr with_path(ExprPtr base, const Json& steps, const std::string& path, int /*depth*/) {
    if (!steps.is_array() || steps.empty()) schema_error(path, "'path' must be a non-empty list");
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Attr;
    TypePtr t = base->type;
    std::size_t i = 0;
    for (const auto& s : steps) {
      const auto spath = join(path, i++);
      PathStep step;
      if (s.is_object() && s.size() == 1 && s.contains("string") && s["string"].is_string()) {
        if (!t->is(Type::Kind::Record)) type_error(spath, "field access on " + type_to_string(*t));
        step.is_field = true;
        step.field = s["string"].get<std::string>();
        const int idx = t->field_index(step.field);
        if (idx < 0) type_error(spath, "no field '" + step.field + "' in " + type_to_string(*t));
        step.index = idx;
        t = t->fields[static_cast<std::size_t>(idx)].second;
      } else if (s.is_number_integer()) {
        if (!t->is(Type::Kind::Array)) type_error(spath, "index into " + type_to_string(*t));
        step.index = s.get<std::int64_t>();
        if (step.index < 0) type_error(spath, "negative index");
        t = t->items;
      } else {
        schema_error(spath, "path steps are {\"string\": field} or integer indices");
      }
      node->path.push_back(std::move(step));
    }
    node->type = t;
    node->args.push_back(std::move(base));
    return node;
  }

  ExprPtr construct(const Json& j, const std::string& path, int depth) {
    if (j.size() != 2 || !j.contains("type")) schema_error(path, "'new' needs exactly 'new' and 'type'");
    auto t = parse_schema(j["type"], join(path, "type"), 0);
    auto node = std::make_unique<Expr>();
    node->type = t;
    const auto& body = j["new"];
    const auto bpath = join(path, "new");
    if (t->is(Type::Kind::Array)) {
      if (!body.is_array()) type_error(bpath, "array construction needs a list");
      node->kind = Expr::Kind::NewArray;
      std::size_t i = 0;
      for (const auto& item : body) {
        const auto ipath = join(bpath, i++);
        auto e = coerce(expr(item, ipath, depth + 1), *t->items);
        if (!same_type(*e->type, *t->items))
          type_error(ipath, "element is " + type_to_string(*e->type) + ", expected " + type_to_string(*t->items));
        node->args.push_back(std::move(e));
      }
      return node;
    }
    if (t->is(Type::Kind::Record)) {
      if (!body.is_object()) type_error(bpath, "record construction needs an object");
      node->kind = Expr::Kind::NewRecord;
      node->name = t->name;
      for (const auto& [k, _] : body.items())
        if (t->field_index(k) < 0) type_error(join(bpath, k), "no field '" + k + "' in " + type_to_string(*t));
      for (const auto& [fname, ftype] : t->fields) {
        const auto fpath = join(bpath, fname);
        if (!body.contains(fname)) type_error(bpath, "missing field '" + fname + "'");
        auto e = coerce(expr(body[fname], fpath, depth + 1), *ftype);
        if (!same_type(*e->type, *ftype))
          type_error(fpath, "field is " + type_to_string(*e->type) + ", expected " + type_to_string(*ftype));
        node->names.push_back(fname);
        node->args.push_back(std::move(e));
      }
      return node;
    }
    type_error(path, "'new' builds arrays or records only");
  }

  ExprPtr call(const std::string& fname, const Json& raw_args, const std::string& path, int depth) {
    const auto* info = find_builtin(fname);
    if (info == nullptr) throw PfaError(ErrorKind::UnknownBuiltin, "unknown function '" + fname + "'", path);
    const auto apath = join(path, fname);
    std::vector<ExprPtr> args;
    if (raw_args.is_array()) {
      std::size_t i = 0;
      for (const auto& a : raw_args) args.push_back(expr(a, join(apath, i++), depth + 1));
    } else {
      args.push_back(expr(raw_args, apath, depth + 1));
    }
    if (args.size() != info->arity)
      type_error(path, fname + " takes " + std::to_string(info->arity) + " argument(s), got " + std::to_string(args.size()));

    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::Call;
    node->builtin = info->id;
    node->name = fname;
    node->type = result_type(*info, args, path);
    node->args = std::move(args);
    return node;
  }

  static TypePtr result_type(const BuiltinInfo& info, std::vector<ExprPtr>& args, const std::string& path) {
    auto bad = [&]() -> TypePtr {
      std::string sig;
      for (std::size_t i = 0; i < args.size(); ++i) sig += (i ? ", " : "") + type_to_string(*args[i]->type);
      type_error(path, std::string(info.name) + " does not accept (" + sig + ")");
    };
    auto unify_numeric = [&]() {
      if (args[0]->type->is(Type::Kind::Double) || args[1]->type->is(Type::Kind::Double)) {
        args[0] = coerce(std::move(args[0]), *kDouble);
        args[1] = coerce(std::move(args[1]), *kDouble);
      }
    };
    const Type& a0 = *args[0]->type;
    switch (info.id) {
      case Builtin::Add:
      case Builtin::Sub:
      case Builtin::Mul:
        unify_numeric();
        if (args[0]->type->is(Type::Kind::Double) && args[1]->type->is(Type::Kind::Double)) return kDouble;
        if (args[0]->type->is(Type::Kind::Int) && args[1]->type->is(Type::Kind::Int)) return kInt;
        return bad();
      case Builtin::Div:
        args[0] = coerce(std::move(args[0]), *kDouble);
        args[1] = coerce(std::move(args[1]), *kDouble);
        if (args[0]->type->is(Type::Kind::Double) && args[1]->type->is(Type::Kind::Double)) return kDouble;
        return bad();
      case Builtin::IntDiv:
        if (a0.is(Type::Kind::Int) && args[1]->type->is(Type::Kind::Int)) return kInt;
        return bad();
      case Builtin::Neg:
        if (a0.is(Type::Kind::Double) || a0.is(Type::Kind::Int)) return args[0]->type;
        return bad();
      case Builtin::Lt:
      case Builtin::Le:
      case Builtin::Gt:
      case Builtin::Ge:
        unify_numeric();
        if (same_type(*args[0]->type, *args[1]->type) &&
            (args[0]->type->is(Type::Kind::Double) || args[0]->type->is(Type::Kind::Int) ||
             args[0]->type->is(Type::Kind::String)))
          return kBoolean;
        return bad();
      case Builtin::Eq:
      case Builtin::Ne:
        unify_numeric();
        if (same_type(*args[0]->type, *args[1]->type)) return kBoolean;
        return bad();
      case Builtin::And:
      case Builtin::Or:
        if (a0.is(Type::Kind::Boolean) && args[1]->type->is(Type::Kind::Boolean)) return kBoolean;
        return bad();
      case Builtin::Not:
        if (a0.is(Type::Kind::Boolean)) return kBoolean;
        return bad();
      case Builtin::Exp:
      case Builtin::Ln:
        args[0] = coerce(std::move(args[0]), *kDouble);
        if (args[0]->type->is(Type::Kind::Double)) return kDouble;
        return bad();
      case Builtin::Logit:
      case Builtin::Relu:
        args[0] = coerce(std::move(args[0]), *kDouble);
        if (args[0]->type->is(Type::Kind::Double)) return kDouble;
        if (args[0]->type->is_double_array()) return kDoubleArray;
        return bad();
      case Builtin::Softmax:
        if (a0.is_double_array()) return kDoubleArray;
        return bad();
      case Builtin::Argmax:
        if (a0.is_double_array()) return kInt;
        return bad();
      case Builtin::Len:
        if (a0.is(Type::Kind::Array)) return kInt;
        return bad();
      case Builtin::Dot:
        if (a0.is_double_matrix() && args[1]->type->is_double_array()) return kDoubleArray;
        if (a0.is_double_array() && args[1]->type->is_double_array()) return kDouble;
        return bad();
      case Builtin::VecAdd:
        if (a0.is_double_array() && args[1]->type->is_double_array()) return kDoubleArray;
        return bad();
      case Builtin::CastDouble:
        if (a0.is(Type::Kind::Int) || a0.is(Type::Kind::Double)) return kDouble;
        return bad();
      case Builtin::SimpleLayers: {
        const Type& layers = *args[1]->type;
        if (!a0.is_double_array() || !layers.is(Type::Kind::Array) || !layers.items->is(Type::Kind::Record)) return bad();
        const Type& layer = *layers.items;
        const int w = layer.field_index("weights");
        const int b = layer.field_index("bias");
        const int act = layer.field_index("activation");
        if (w < 0 || b < 0 || act < 0 || !layer.fields[static_cast<std::size_t>(w)].second->is_double_matrix() ||
            !layer.fields[static_cast<std::size_t>(b)].second->is_double_array() ||
            !layer.fields[static_cast<std::size_t>(act)].second->is(Type::Kind::String))
          type_error(path, "layers must be records {weights: array<array<double>>, bias: array<double>, activation: string}");
        return kDoubleArray;
      }
    }
    return bad();
  }

  PfaDocument& doc_;
  std::vector<Binding> scope_;
};

void describe_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Literal: out += "(lit " + type_to_string(*e.type) + " " + render_value(e.literal) + ")"; return;
    case Expr::Kind::Input: out += "input"; return;
    case Expr::Kind::Symbol: out += e.name; return;
    case Expr::Kind::Cell: out += "(cell " + e.name + ")"; return;
    case Expr::Kind::Let:
      out += "(let (";
      for (std::size_t i = 0; i < e.names.size(); ++i) {
        if (i) out += " ";
        out += "(" + e.names[i] + " ";
        describe_expr(*e.args[i], out);
        out += ")";
      }
      out += ") ";
      describe_expr(*e.args.back(), out);
      out += ")";
      return;
    case Expr::Kind::If:
      out += "(if ";
      describe_expr(*e.args[0], out);
      out += " ";
      describe_expr(*e.args[1], out);
      out += " ";
      describe_expr(*e.args[2], out);
      out += ")";
      return;
    case Expr::Kind::Call:
      out += "(" + e.name;
      for (const auto& a : e.args) {
        out += " ";
        describe_expr(*a, out);
      }
      out += ")";
      return;
    case Expr::Kind::Attr:
      out += "(attr ";
      describe_expr(*e.args[0], out);
      for (const auto& s : e.path) out += s.is_field ? " ." + s.field : " [" + std::to_string(s.index) + "]";
      out += ")";
      return;
    case Expr::Kind::NewRecord:
      out += "(record " + e.name;
      for (std::size_t i = 0; i < e.names.size(); ++i) {
        out += " (" + e.names[i] + " ";
        describe_expr(*e.args[i], out);
        out += ")";
      }
      out += ")";
      return;
    case Expr::Kind::NewArray:
      out += "(array";
      for (const auto& a : e.args) {
        out += " ";
        describe_expr(*a, out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string PfaDocument::describe() const {
  std::string out = "(pfa " + name;
  if (version) out += " v" + std::to_string(*version);
  out += "\n  (input " + type_to_string(*input) + ")\n  (output " + type_to_string(*output) + ")";
  for (const auto& c : cells) out += "\n  (cell " + c.name + " " + type_to_string(*c.type) + ")";
  out += "\n  (action ";
  describe_expr(*action, out);
  return out + "))";
}

std::shared_ptr<const PfaDocument> parse_pfa(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PfaError(ErrorKind::JsonError, e.what());
  }
  if (!root.is_object()) schema_error("", "document must be a JSON object");

  static const std::array<std::string_view, 8> kKnown = {"name", "version", "doc", "method", "input", "output", "cells", "action"};
  for (const auto& [k, _] : root.items())
    if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end()) schema_error(k, "unsupported top-level key");

  auto doc = std::make_shared<PfaDocument>();
  if (root.contains("name")) {
    if (!root["name"].is_string()) schema_error("name", "must be a string");
    doc->name = root["name"].get<std::string>();
  }
  if (root.contains("version")) {
    if (!root["version"].is_number_integer()) schema_error("version", "must be an integer");
    doc->version = root["version"].get<std::int64_t>();
  }
  if (root.contains("doc")) {
    if (!root["doc"].is_string()) schema_error("doc", "must be a string");
    doc->doc = root["doc"].get<std::string>();
  }
  if (root.contains("method") && root["method"] != "map") schema_error("method", "only \"map\" is supported");
  if (!root.contains("input")) schema_error("input", "missing");
  if (!root.contains("output")) schema_error("output", "missing");
  if (!root.contains("action")) schema_error("action", "missing");
  doc->input = parse_schema(root["input"], "input", 0);
  doc->output = parse_schema(root["output"], "output", 0);

  if (root.contains("cells")) {
    const auto& cells = root["cells"];
    if (!cells.is_object()) schema_error("cells", "must be an object");
    for (const auto& [name, spec] : cells.items()) {
      const auto cpath = "cells/" + name;
      if (!spec.is_object() || !spec.contains("type") || !spec.contains("init"))
        schema_error(cpath, "cell needs 'type' and 'init'");
      for (const auto& [k, _] : spec.items())
        if (k != "type" && k != "init") schema_error(cpath + "/" + k, "unsupported cell option (cells are read-only)");
      auto t = parse_schema(spec["type"], cpath + "/type", 0);
      auto init = json_to_value(spec["init"], *t, cpath + "/init");
      doc->cells.push_back({name, std::move(t), std::move(init)});
    }
  }

  Checker checker(*doc);
  auto action = checker.action(root["action"], "action");
  if (action->kind == Expr::Kind::Literal && action->slot == 1 && doc->output->is(Type::Kind::Double))
    action = coerce(std::move(action), *doc->output);
  if (!same_type(*action->type, *doc->output))
    type_error("action", "produces " + type_to_string(*action->type) + " but output is " + type_to_string(*doc->output));
  doc->action = std::move(action);
  return doc;
}

}  // namespace ledgerml::pfa
