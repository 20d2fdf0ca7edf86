#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "ledgerml/contract/host.hpp"

namespace ledgerml::contract {

namespace {

using K = Value::Kind;

[[noreturn]] void type_error(std::string detail) { throw ContractAbort(AbortReason::TypeError, std::move(detail)); }

[[noreturn]] void type_error_op(Op op, const Value& a, const Value& b) {
  type_error("operator '" + std::string(op_symbol(op)) + "' does not apply to " + std::string(kind_name(a.kind())) +
             " and " + std::string(kind_name(b.kind())));
}

std::uint64_t sixteenths(std::size_t bytes) { return (static_cast<std::uint64_t>(bytes) + 15) / 16; }

double finite(double d) {
  if (!std::isfinite(d)) throw ContractAbort(AbortReason::NumericFault, "non-finite double " + format_double(d));
  return d;
}

template <typename F>
CoinAmount dec_op(F&& f) {
  try {
    return f();
  } catch (const ArithmeticError& e) {
    throw ContractAbort(AbortReason::NumericFault, e.what());
  }
}

const std::string& want_str(const Value& v, std::string_view what) {
  if (!v.is(K::Str)) type_error(std::string(what) + " must be Str, got " + std::string(kind_name(v.kind())));
  return v.as_str();
}

std::int64_t want_int(const Value& v, std::string_view what) {
  if (!v.is(K::Int)) type_error(std::string(what) + " must be Int, got " + std::string(kind_name(v.kind())));
  return v.as_int();
}

CoinAmount dbl_to_dec(double d) {
  finite(d);
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed, CoinAmount::kDecimals);
  if (res.ec != std::errc()) throw ContractAbort(AbortReason::NumericFault, "double out of decimal range");
  try {
    return CoinAmount::parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
  } catch (const ArithmeticError&) {
    throw ContractAbort(AbortReason::NumericFault, "double " + format_double(d) + " out of decimal range");
  }
}

double dec_to_dbl(CoinAmount c) {
  const auto text = c.to_string();
  double d = 0;
  std::from_chars(text.data(), text.data() + text.size(), d);
  return d;
}

class Interpreter {
 public:
  Interpreter(const Ast& ast, HostContext& host) : ast_(ast), host_(host), locals_(ast.local_count) {
    const auto& in = host.input();
    params_.push_back(Value::integer(static_cast<std::int64_t>(in.sender.value)));
    params_.push_back(Value::integer(in.action));
    params_.push_back(Value::decimal(in.coins));
    if (in.asset) {
      Record rec;
      rec.set("id", Value::str(in.asset->id));
      rec.set("amount", Value::decimal(in.asset->amount));
      params_.push_back(Value::record(std::move(rec)));
    } else {
      params_.emplace_back();
    }
    params_.push_back(Value::bytes(in.data));
  }

  void run() { block(ast_.handler); }

 private:
  void block(const std::vector<Stmt>& body) {
    for (const auto& s : body) stmt(s);
  }

  bool condition(const Expr& e) {
    Value v = eval(e);
    if (!v.is(K::Bool)) type_error("condition must be Bool, got " + std::string(kind_name(v.kind())));
    return v.as_bool();
  }

  void stmt(const Stmt& s) {
    host_.charge(1);
    switch (s.kind) {
      case Stmt::Kind::Let:
      case Stmt::Kind::Assign: locals_[s.slot] = eval(*s.expr); break;
      case Stmt::Kind::Expr: eval(*s.expr); break;
      case Stmt::Kind::If:
        if (condition(*s.expr)) block(s.body);
        else block(s.else_body);
        break;
      case Stmt::Kind::While:
        while (condition(*s.expr)) block(s.body);
        break;
    }
  }

  Value eval(const Expr& e) {
    host_.charge(1);
    switch (e.kind) {
      case Expr::Kind::Literal: return e.literal;
      case Expr::Kind::Const: return ast_.constants[e.slot].value;
      case Expr::Kind::Param: return params_[e.slot];
      case Expr::Kind::Local: return locals_[e.slot];
      case Expr::Kind::Unary: return unary(e.op, eval(*e.kids[0]));
      case Expr::Kind::Binary: return binary(e);
      case Expr::Kind::Call: return call(e);
      case Expr::Kind::List: {
        List items;
        items.reserve(e.kids.size());
        for (const auto& k : e.kids) items.push_back(eval(*k));
        return Value::list(std::move(items));
      }
      case Expr::Kind::Record: {
        Record rec;
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          rec.keys.push_back(e.keys[i]);
          rec.values.push_back(eval(*e.kids[i]));
        }
        return Value::record(std::move(rec));
      }
      case Expr::Kind::Field: {
        Value base = eval(*e.kids[0]);
        if (!base.is(K::Rec)) type_error("field access ." + e.name + " on " + std::string(kind_name(base.kind())));
        const Value* f = base.as_rec().find(e.name);
        if (f == nullptr) throw ContractAbort(AbortReason::FieldNotFound, "no field '" + e.name + "'");
        return *f;
      }
      case Expr::Kind::Index: {
        Value base = eval(*e.kids[0]);
        Value idx = eval(*e.kids[1]);
        return index(base, idx);
      }
    }
    return {};
  }

  static Value index(const Value& base, const Value& idx) {
    if (base.is(K::Rec)) {
      const auto& key = want_str(idx, "record index");
      const Value* f = base.as_rec().find(key);
      if (f == nullptr) throw ContractAbort(AbortReason::FieldNotFound, "no field '" + key + "'");
      return *f;
    }
    const auto i = want_int(idx, "index");
    auto check = [&](std::size_t n) {
      if (i < 0 || static_cast<std::uint64_t>(i) >= n)
        throw ContractAbort(AbortReason::IndexOutOfRange,
                            "index " + std::to_string(i) + " out of range for length " + std::to_string(n));
    };
    if (base.is(K::List)) {
      check(base.as_list().size());
      return base.as_list()[static_cast<std::size_t>(i)];
    }
    if (base.is(K::Bytes)) {
      check(base.as_bytes().size());
      return Value::integer(base.as_bytes()[static_cast<std::size_t>(i)]);
    }
    type_error("cannot index " + std::string(kind_name(base.kind())));
  }

  static Value unary(Op op, const Value& v) {
    if (op == Op::Not) {
      if (!v.is(K::Bool)) type_error("'!' needs Bool, got " + std::string(kind_name(v.kind())));
      return Value::boolean(!v.as_bool());
    }
    switch (v.kind()) {
      case K::Int:
        if (v.as_int() == INT64_MIN) throw ContractAbort(AbortReason::NumericFault, "integer overflow");
        return Value::integer(-v.as_int());
      case K::Dec: return Value::decimal(dec_op([&] { return -v.as_dec(); }));
      case K::Dbl: return Value::dbl(-v.as_dbl());
      default: type_error("unary '-' needs a number, got " + std::string(kind_name(v.kind())));
    }
  }

  Value binary(const Expr& e) {
    const Op op = e.op;
    if (op == Op::And || op == Op::Or) {
      Value a = eval(*e.kids[0]);
      if (!a.is(K::Bool)) type_error_op(op, a, a);
      if (op == Op::And ? !a.as_bool() : a.as_bool()) return a;
      Value b = eval(*e.kids[1]);
      if (!b.is(K::Bool)) type_error_op(op, a, b);
      return b;
    }
    Value a = eval(*e.kids[0]);
    Value b = eval(*e.kids[1]);
    switch (op) {
      case Op::Eq: return Value::boolean(equal(a, b));
      case Op::Ne: return Value::boolean(!equal(a, b));
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge: return Value::boolean(compare(op, a, b));
      case Op::Add: return add(a, b);
      default: return arith(op, a, b);
    }
  }

  static bool equal(const Value& a, const Value& b) {
    if (a.is(K::Dbl) && b.is(K::Dbl)) return a.as_dbl() == b.as_dbl();
    return a == b;
  }

  static bool compare(Op op, const Value& a, const Value& b) {
    int c = 0;
    if (a.is(K::Int) && b.is(K::Int)) {
      c = a.as_int() < b.as_int() ? -1 : a.as_int() > b.as_int();
    } else if (a.is(K::Dec) && b.is(K::Dec)) {
      c = a.as_dec() < b.as_dec() ? -1 : a.as_dec() > b.as_dec();
    } else if (a.is(K::Dbl) && b.is(K::Dbl)) {
      c = a.as_dbl() < b.as_dbl() ? -1 : a.as_dbl() > b.as_dbl();
    } else if (a.is(K::Str) && b.is(K::Str)) {
      const int r = a.as_str().compare(b.as_str());
      c = r < 0 ? -1 : r > 0;
    } else {
      type_error_op(op, a, b);
    }
    switch (op) {
      case Op::Lt: return c < 0;
      case Op::Le: return c <= 0;
      case Op::Gt: return c > 0;
      default: return c >= 0;
    }
  }

  Value add(const Value& a, const Value& b) {
    if (a.is(K::Str) || b.is(K::Str)) {
      std::string out = render_value(a) + render_value(b);
      host_.charge(sixteenths(out.size()));
      return Value::str(std::move(out));
    }
    if (a.is(K::List) && b.is(K::List)) {
      List out = a.as_list();
      host_.charge(out.size() + b.as_list().size());
      out.insert(out.end(), b.as_list().begin(), b.as_list().end());
      return Value::list(std::move(out));
    }
    if (a.is(K::Bytes) && b.is(K::Bytes)) {
      Bytes out = a.as_bytes();
      out.insert(out.end(), b.as_bytes().begin(), b.as_bytes().end());
      host_.charge(sixteenths(out.size()));
      return Value::bytes(std::move(out));
    }
    return arith(Op::Add, a, b);
  }

  static Value arith(Op op, const Value& a, const Value& b) {
    if (a.is(K::Int) && b.is(K::Int)) return int_arith(op, a.as_int(), b.as_int());
    if (a.is(K::Dbl) && b.is(K::Dbl)) {
      const double x = a.as_dbl();
      const double y = b.as_dbl();
      switch (op) {
        case Op::Add: return Value::dbl(finite(x + y));
        case Op::Sub: return Value::dbl(finite(x - y));
        case Op::Mul: return Value::dbl(finite(x * y));
        case Op::Div:
          if (y == 0) throw ContractAbort(AbortReason::DivisionByZero, "division by zero");
          return Value::dbl(finite(x / y));
        default: type_error_op(op, a, b);
      }
    }
    if (a.is(K::Dec) && b.is(K::Dec)) {
      const CoinAmount x = a.as_dec();
      const CoinAmount y = b.as_dec();
      switch (op) {
        case Op::Add: return Value::decimal(dec_op([&] { return x + y; }));
        case Op::Sub: return Value::decimal(dec_op([&] { return x - y; }));
        case Op::Mul: return Value::decimal(dec_op([&] { return x.times(y); }));
        case Op::Div:
          if (y.is_zero()) throw ContractAbort(AbortReason::DivisionByZero, "division by zero");
          return Value::decimal(dec_op([&] { return x.divided_by(y); }));
        default: type_error_op(op, a, b);
      }
    }
    if (a.is(K::Dec) && b.is(K::Int) && (op == Op::Mul || op == Op::Div)) {
      const CoinAmount x = a.as_dec();
      const std::int64_t k = b.as_int();
      if (op == Op::Mul) return Value::decimal(dec_op([&] { return x.times(k); }));
      if (k == 0) throw ContractAbort(AbortReason::DivisionByZero, "division by zero");
      return Value::decimal(dec_op([&] { return x.divided_by(k); }));
    }
    if (a.is(K::Int) && b.is(K::Dec) && op == Op::Mul) {
      return Value::decimal(dec_op([&] { return b.as_dec().times(a.as_int()); }));
    }
    type_error_op(op, a, b);
  }

  static Value int_arith(Op op, std::int64_t x, std::int64_t y) {
    std::int64_t r = 0;
    bool overflow = false;
    switch (op) {
      case Op::Add: overflow = __builtin_add_overflow(x, y, &r); break;
      case Op::Sub: overflow = __builtin_sub_overflow(x, y, &r); break;
      case Op::Mul: overflow = __builtin_mul_overflow(x, y, &r); break;
      case Op::Div:
      case Op::Mod:
        if (y == 0) throw ContractAbort(AbortReason::DivisionByZero, "division by zero");
        if (x == INT64_MIN && y == -1) {
          if (op == Op::Mod) return Value::integer(0);
          overflow = true;
          break;
        }
        r = op == Op::Div ? x / y : x % y;
        break;
      default: break;
    }
    if (overflow) throw ContractAbort(AbortReason::NumericFault, "integer overflow");
    return Value::integer(r);
  }

  Value call(const Expr& e) {
    std::vector<Value> args;
    args.reserve(e.kids.size());
    for (const auto& k : e.kids) args.push_back(eval(*k));
    switch (e.fn) {
      case HostFn::Send: return host_send(args);
      case HostFn::Log: {
        host_.log(args[0].is(K::Str) ? args[0].as_str() : render_value(args[0]));
        return {};
      }
      case HostFn::Get: return host_.storage_get(want_str(args[0], "storage key"));
      case HostFn::Put: host_.storage_put(want_str(args[0], "storage key"), args[1]); return {};
      case HostFn::CreateModel:
        return Value::model(host_.create_model(want_str(args[0], "model language"), want_str(args[1], "model definition")));
      case HostFn::Score: return host_.score(args[0], args[1]);
      case HostFn::Self: return Value::integer(static_cast<std::int64_t>(host_.input().self.value));
      case HostFn::Balance: {
        const auto id = want_int(args[0], "account id");
        if (id < 0) return {};
        auto bal = host_.view().coin_balance(AccountId{static_cast<std::uint64_t>(id)});
        return bal ? Value::decimal(*bal) : Value();
      }
      case HostFn::AssetBalance: {
        const auto id = want_int(args[0], "account id");
        const auto& asset = want_str(args[1], "asset id");
        if (id < 0) return Value::decimal({});
        return Value::decimal(host_.view().asset_balance(AccountId{static_cast<std::uint64_t>(id)}, asset));
      }
      case HostFn::Str: {
        std::string out = render_value(args[0]);
        host_.charge(sixteenths(out.size()));
        return Value::str(std::move(out));
      }
      case HostFn::Len: {
        const Value& v = args[0];
        switch (v.kind()) {
          case K::Str: return Value::integer(static_cast<std::int64_t>(v.as_str().size()));
          case K::Bytes: return Value::integer(static_cast<std::int64_t>(v.as_bytes().size()));
          case K::List: return Value::integer(static_cast<std::int64_t>(v.as_list().size()));
          case K::Rec: return Value::integer(static_cast<std::int64_t>(v.as_rec().size()));
          default: type_error("len of " + std::string(kind_name(v.kind())));
        }
      }
      case HostFn::Dbl: return to_dbl(args[0]);
      case HostFn::Int: return to_int(args[0]);
      case HostFn::Dec: return to_dec(args[0]);
      case HostFn::Utf8: {
        const Value& v = args[0];
        if (v.is(K::Str)) {
          host_.charge(sixteenths(v.as_str().size()));
          return Value::bytes(to_bytes(v.as_str()));
        }
        if (v.is(K::Bytes)) {
          host_.charge(sixteenths(v.as_bytes().size()));
          return Value::str(std::string(v.as_bytes().begin(), v.as_bytes().end()));
        }
        type_error("utf8 needs Str or Bytes, got " + std::string(kind_name(v.kind())));
      }
      case HostFn::UnpackF64: return unpack_f64(args[0]);
    }
    return {};
  }

  Value host_send(const std::vector<Value>& args) {
    const auto receiver = want_int(args[0], "send receiver");
    const auto action = want_int(args[1], "send action");
    if (action < INT32_MIN || action > INT32_MAX) type_error("send action out of 32-bit range");
    if (!args[2].is(K::Dec)) type_error("send coins must be Dec, got " + std::string(kind_name(args[2].kind())));
    std::optional<Asset> asset;
    if (!args[3].is_none()) {
      const Value& a = args[3];
      const Value* id = a.is(K::Rec) ? a.as_rec().find("id") : nullptr;
      const Value* amount = a.is(K::Rec) ? a.as_rec().find("amount") : nullptr;
      if (id == nullptr || amount == nullptr || !id->is(K::Str) || !amount->is(K::Dec))
        type_error("send asset must be none or {id: Str, amount: Dec}");
      asset = Asset{id->as_str(), amount->as_dec()};
    }
    if (!args[4].is(K::Bytes)) type_error("send data must be Bytes, got " + std::string(kind_name(args[4].kind())));
    if (receiver < 0) throw ContractAbort(AbortReason::BadReceiver, "negative account id");
    host_.send(AccountId{static_cast<std::uint64_t>(receiver)}, static_cast<std::int32_t>(action), args[2].as_dec(),
               std::move(asset), args[4].as_bytes());
    return {};
  }

  static Value to_dbl(const Value& v) {
    switch (v.kind()) {
      case K::Dbl: return v;
      case K::Int: return Value::dbl(static_cast<double>(v.as_int()));
      case K::Dec: return Value::dbl(dec_to_dbl(v.as_dec()));
      default: type_error("dbl of " + std::string(kind_name(v.kind())));
    }
  }

  static Value to_int(const Value& v) {
    switch (v.kind()) {
      case K::Int: return v;
      case K::Dbl: {
        const double t = std::trunc(v.as_dbl());
        if (!(t >= -0x1p63 && t < 0x1p63))
          throw ContractAbort(AbortReason::NumericFault, "double " + format_double(v.as_dbl()) + " out of Int range");
        return Value::integer(static_cast<std::int64_t>(t));
      }
      case K::Dec: {
        const __int128 whole = v.as_dec().units() / CoinAmount::kScale;
        if (whole < INT64_MIN || whole > INT64_MAX) throw ContractAbort(AbortReason::NumericFault, "decimal out of Int range");
        return Value::integer(static_cast<std::int64_t>(whole));
      }
      default: type_error("int of " + std::string(kind_name(v.kind())));
    }
  }

  static Value to_dec(const Value& v) {
    switch (v.kind()) {
      case K::Dec: return v;
      case K::Int: return Value::decimal(dec_op([&] { return CoinAmount::from_whole(v.as_int()); }));
      case K::Dbl: return Value::decimal(dbl_to_dec(v.as_dbl()));
      default: type_error("dec of " + std::string(kind_name(v.kind())));
    }
  }

  Value unpack_f64(const Value& v) {
    if (!v.is(K::Bytes)) type_error("unpackF64 needs Bytes, got " + std::string(kind_name(v.kind())));
    const Bytes& b = v.as_bytes();
    if (b.size() % 8 != 0) type_error("unpackF64 needs a multiple of 8 bytes, got " + std::to_string(b.size()));
    host_.charge(b.size() / 8);
    List out;
    out.reserve(b.size() / 8);
    for (std::size_t i = 0; i < b.size(); i += 8) {
      std::uint64_t bits = 0;
      for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[i + static_cast<std::size_t>(k)];
      out.push_back(Value::dbl(finite(std::bit_cast<double>(bits))));
    }
    return Value::list(std::move(out));
  }

  const Ast& ast_;
  HostContext& host_;
  std::vector<Value> params_;
  std::vector<Value> locals_;
};

}  // namespace

ExecutionOutcome execute_receive(const Ast& ast, const LedgerView& view, const InvocationInput& input,
                                 ExecutionLimits limits, ModelCache* cache) {
  HostContext host(view, input, limits, cache);
  ExecutionOutcome out;
  try {
    Interpreter(ast, host).run();
    out.committed = true;
    out.sends = host.take_sends();
    out.overlay = host.take_overlay();
  } catch (const ContractAbort& e) {
    out.committed = false;
    out.reason = e.reason();
    out.detail = e.detail();
  }
  out.logs = host.take_logs();
  out.steps = host.steps_used();
  return out;
}

}  // namespace ledgerml::contract
