#include <cstdio>

#include "ledgerml/contract/ast.hpp"

namespace ledgerml::contract {

std::string_view host_fn_name(HostFn f) {
  switch (f) {
    case HostFn::Send: return "send";
    case HostFn::Log: return "log";
    case HostFn::Get: return "get";
    case HostFn::Put: return "put";
    case HostFn::CreateModel: return "createModel";
    case HostFn::Score: return "score";
    case HostFn::Self: return "self";
    case HostFn::Balance: return "balance";
    case HostFn::AssetBalance: return "assetBalance";
    case HostFn::Str: return "str";
    case HostFn::Len: return "len";
    case HostFn::Dbl: return "dbl";
    case HostFn::Int: return "int";
    case HostFn::Dec: return "dec";
    case HostFn::Utf8: return "utf8";
    case HostFn::UnpackF64: return "unpackF64";
  }
  return "?";
}

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Neg: return "-";
    case Op::Not: return "!";
  }
  return "?";
}

namespace {

bool same_expr(const Expr* a, const Expr* b);

bool same_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_expr(a[i].get(), b[i].get())) return false;
  return true;
}

bool same_expr(const Expr* a, const Expr* b) {
  if (a == nullptr || b == nullptr) return a == b;
  if (a->kind != b->kind || a->name != b->name || a->slot != b->slot || a->keys != b->keys) return false;
  if (!(a->literal == b->literal)) return false;
  if ((a->kind == Expr::Kind::Unary || a->kind == Expr::Kind::Binary) && a->op != b->op) return false;
  if (a->kind == Expr::Kind::Call && a->fn != b->fn) return false;
  return same_exprs(a->kids, b->kids);
}

bool same_stmts(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.kind != y.kind || x.name != y.name || x.slot != y.slot || x.has_else != y.has_else) return false;
    if (!same_expr(x.expr.get(), y.expr.get())) return false;
    if (!same_stmts(x.body, y.body) || !same_stmts(x.else_body, y.else_body)) return false;
  }
  return true;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c >= 0x7f) {
          char buf[5];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out += '"';
  return out;
}

// Source form of a literal value. Bytes literals only ever hold `empty`.
std::string literal_source(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None: return "none";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Dec: return v.as_dec().to_string() + "m";
    case Value::Kind::Dbl: return format_double(v.as_dbl());
    case Value::Kind::Str: return quote(v.as_str());
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Bytes: return "empty";
    case Value::Kind::List: {
      std::string out = "[";
      const auto& items = v.as_list();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += literal_source(items[i]);
      }
      return out + "]";
    }
    case Value::Kind::Rec: {
      std::string out = "{";
      const auto& rec = v.as_rec();
      for (std::size_t i = 0; i < rec.size(); ++i) {
        if (i) out += ", ";
        out += rec.keys[i] + ": " + literal_source(rec.values[i]);
      }
      return out + "}";
    }
    case Value::Kind::Model: return "model#" + std::to_string(v.as_model().index);
  }
  return "?";
}

std::string expr_source(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal: return literal_source(e.literal);
    case Expr::Kind::Const:
    case Expr::Kind::Param:
    case Expr::Kind::Local: return e.name;
    case Expr::Kind::Unary: return "(" + std::string(op_symbol(e.op)) + expr_source(*e.kids[0]) + ")";
    case Expr::Kind::Binary:
      return "(" + expr_source(*e.kids[0]) + " " + std::string(op_symbol(e.op)) + " " + expr_source(*e.kids[1]) + ")";
    case Expr::Kind::Call: {
      std::string out = std::string(host_fn_name(e.fn)) + "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        out += expr_source(*e.kids[i]);
      }
      return out + ")";
    }
    case Expr::Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        out += expr_source(*e.kids[i]);
      }
      return out + "]";
    }
    case Expr::Kind::Record: {
      std::string out = "{";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        out += e.keys[i] + ": " + expr_source(*e.kids[i]);
      }
      return out + "}";
    }
    case Expr::Kind::Field: return expr_source(*e.kids[0]) + "." + e.name;
    case Expr::Kind::Index: return expr_source(*e.kids[0]) + "[" + expr_source(*e.kids[1]) + "]";
  }
  return "?";
}

void stmts_source(const std::vector<Stmt>& body, int indent, std::string& out);

void stmt_source(const Stmt& s, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Let: out += pad + "let " + s.name + " = " + expr_source(*s.expr) + ";\n"; break;
    case Stmt::Kind::Assign: out += pad + s.name + " = " + expr_source(*s.expr) + ";\n"; break;
    case Stmt::Kind::Expr: out += pad + expr_source(*s.expr) + ";\n"; break;
    case Stmt::Kind::While:
      out += pad + "while (" + expr_source(*s.expr) + ") {\n";
      stmts_source(s.body, indent + 1, out);
      out += pad + "}\n";
      break;
    case Stmt::Kind::If:
      out += pad + "if (" + expr_source(*s.expr) + ") {\n";
      stmts_source(s.body, indent + 1, out);
      out += pad + "}";
      if (s.has_else) {
        out += " else {\n";
        stmts_source(s.else_body, indent + 1, out);
        out += pad + "}";
      }
      out += "\n";
      break;
  }
}

void stmts_source(const std::vector<Stmt>& body, int indent, std::string& out) {
  for (const auto& s : body) stmt_source(s, indent, out);
}

std::string expr_dump(const Expr& e) {
  auto join = [](const std::vector<ExprPtr>& kids) {
    std::string out;
    for (const auto& k : kids) out += " " + expr_dump(*k);
    return out;
  };
  switch (e.kind) {
    case Expr::Kind::Literal: return literal_source(e.literal);
    case Expr::Kind::Const: return "const:" + e.name;
    case Expr::Kind::Param: return "param:" + e.name;
    case Expr::Kind::Local: return "local:" + e.name + "#" + std::to_string(e.slot);
    case Expr::Kind::Unary: return std::string(e.op == Op::Neg ? "(neg" : "(not") + join(e.kids) + ")";
    case Expr::Kind::Binary: return "(" + std::string(op_symbol(e.op)) + join(e.kids) + ")";
    case Expr::Kind::Call: return "(call " + std::string(host_fn_name(e.fn)) + join(e.kids) + ")";
    case Expr::Kind::List: return "(list" + join(e.kids) + ")";
    case Expr::Kind::Record: {
      std::string out = "(record";
      for (std::size_t i = 0; i < e.kids.size(); ++i) out += " (" + e.keys[i] + " " + expr_dump(*e.kids[i]) + ")";
      return out + ")";
    }
    case Expr::Kind::Field: return "(field " + expr_dump(*e.kids[0]) + " " + e.name + ")";
    case Expr::Kind::Index: return "(index" + join(e.kids) + ")";
  }
  return "?";
}

std::string stmts_dump(const std::vector<Stmt>& body) {
  std::string out;
  for (const auto& s : body) {
    out += " ";
    switch (s.kind) {
      case Stmt::Kind::Let: out += "(let " + s.name + "#" + std::to_string(s.slot) + " " + expr_dump(*s.expr) + ")"; break;
      case Stmt::Kind::Assign: out += "(set " + s.name + "#" + std::to_string(s.slot) + " " + expr_dump(*s.expr) + ")"; break;
      case Stmt::Kind::Expr: out += "(expr " + expr_dump(*s.expr) + ")"; break;
      case Stmt::Kind::While: out += "(while " + expr_dump(*s.expr) + " (do" + stmts_dump(s.body) + "))"; break;
      case Stmt::Kind::If:
        out += "(if " + expr_dump(*s.expr) + " (then" + stmts_dump(s.body) + ")";
        if (s.has_else) out += " (else" + stmts_dump(s.else_body) + ")";
        out += ")";
        break;
    }
  }
  return out;
}

}  // namespace

bool same_structure(const Ast& a, const Ast& b) {
  if (a.params != b.params || a.local_count != b.local_count || a.constants.size() != b.constants.size()) return false;
  for (std::size_t i = 0; i < a.constants.size(); ++i) {
    if (a.constants[i].name != b.constants[i].name || !(a.constants[i].value == b.constants[i].value)) return false;
  }
  return same_stmts(a.handler, b.handler);
}

std::string pretty_print(const Ast& ast) {
  std::string out;
  for (const auto& c : ast.constants) out += "const " + c.name + " = " + literal_source(c.value) + ";\n";
  out += "on receive(";
  for (std::size_t i = 0; i < ast.params.size(); ++i) {
    if (i) out += ", ";
    out += ast.params[i];
  }
  out += ") {\n";
  stmts_source(ast.handler, 1, out);
  out += "}\n";
  return out;
}

std::string dump(const Ast& ast) {
  std::string out = "(contract";
  for (const auto& c : ast.constants) out += " (const " + c.name + " " + literal_source(c.value) + ")";
  out += " (params";
  for (const auto& p : ast.params) out += " " + p;
  out += ") (body" + stmts_dump(ast.handler) + "))";
  return out;
}

}  // namespace ledgerml::contract
