#include <cmath>
#include <limits>

#include "ledgerml/pfa/detmath.hpp"
#include "ledgerml/pfa/document.hpp"
#include "ledgerml/pfa/error.hpp"

namespace ledgerml::pfa {

namespace {

std::vector<double> to_doubles(const Value& v) {
  std::vector<double> out;
  out.reserve(v.as_list().size());
  for (const auto& e : v.as_list()) out.push_back(e.as_dbl());
  return out;
}

Value from_doubles(const std::vector<double>& v) {
  List out;
  out.reserve(v.size());
  for (double d : v) out.push_back(Value::dbl(d));
  return Value::list(std::move(out));
}

std::int64_t checked_int(std::int64_t a, std::int64_t b, Builtin op) {
  std::int64_t r = 0;
  bool overflow = false;
  switch (op) {
    case Builtin::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case Builtin::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case Builtin::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    case Builtin::IntDiv:
      if (b == 0) throw PfaError(ErrorKind::NumericFault, "integer division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow = true;
      else r = a / b;
      break;
    default: break;
  }
  if (overflow) throw PfaError(ErrorKind::NumericFault, "integer overflow");
  return r;
}

bool less(const Value& a, const Value& b) {
  switch (a.kind()) {
    case Value::Kind::Dbl: return a.as_dbl() < b.as_dbl();
    case Value::Kind::Int: return a.as_int() < b.as_int();
    default: return a.as_str() < b.as_str();
  }
}

// IEEE equality for doubles; structural for everything else.
bool equal(const Value& a, const Value& b) {
  if (a.is(Value::Kind::Dbl)) return a.as_dbl() == b.as_dbl();
  if (a.is(Value::Kind::List)) {
    const auto& x = a.as_list();
    const auto& y = b.as_list();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal(x[i], y[i])) return false;
    return true;
  }
  if (a.is(Value::Kind::Rec)) {
    const auto& x = a.as_rec();
    const auto& y = b.as_rec();
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal(x.values[i], y.values[i])) return false;
    return true;
  }
  return a == b;
}

class Evaluator {
 public:
  Evaluator(const PfaDocument& doc, const Value& input, std::optional<std::uint64_t> budget)
      : doc_(doc), input_(input), budget_(budget), slots_(doc.slot_count) {}

  Value run() { return eval(*doc_.action); }
  [[nodiscard]] std::uint64_t cost() const { return cost_; }

 private:
  void charge(std::uint64_t units) {
    cost_ += units;
    if (budget_ && cost_ > *budget_) throw PfaError(ErrorKind::EvalBudgetExceeded, "evaluation budget exhausted");
  }

  Value eval(const Expr& e) {
    charge(1);
    switch (e.kind) {
      case Expr::Kind::Literal: return e.literal;
      case Expr::Kind::Input: return input_;
      case Expr::Kind::Symbol: return slots_[e.slot];
      case Expr::Kind::Cell: return doc_.cells[e.slot].init;
      case Expr::Kind::Let: {
        // Right-hand sides are evaluated before any binding becomes visible.
        std::vector<Value> bound;
        bound.reserve(e.slots.size());
        for (std::size_t i = 0; i < e.slots.size(); ++i) bound.push_back(eval(*e.args[i]));
        for (std::size_t i = 0; i < e.slots.size(); ++i) slots_[e.slots[i]] = std::move(bound[i]);
        return eval(*e.args.back());
      }
      case Expr::Kind::If: return eval(*e.args[0]).as_bool() ? eval(*e.args[1]) : eval(*e.args[2]);
      case Expr::Kind::Attr: {
        Value cur = eval(*e.args[0]);
        for (const auto& step : e.path) {
          if (step.is_field) {
            Value next = cur.as_rec().values[static_cast<std::size_t>(step.index)];
            cur = std::move(next);
          } else {
            const auto& list = cur.as_list();
            if (static_cast<std::uint64_t>(step.index) >= list.size())
              throw PfaError(ErrorKind::IndexOutOfRange,
                             "index " + std::to_string(step.index) + " of array with " + std::to_string(list.size()) + " elements");
            Value next = list[static_cast<std::size_t>(step.index)];
            cur = std::move(next);
          }
        }
        return cur;
      }
      case Expr::Kind::NewRecord: {
        Record rec;
        for (std::size_t i = 0; i < e.names.size(); ++i) {
          rec.keys.push_back(e.names[i]);
          rec.values.push_back(eval(*e.args[i]));
        }
        return Value::record(std::move(rec));
      }
      case Expr::Kind::NewArray: {
        List items;
        items.reserve(e.args.size());
        for (const auto& a : e.args) items.push_back(eval(*a));
        return Value::list(std::move(items));
      }
      case Expr::Kind::Call: return call(e);
    }
    throw PfaError(ErrorKind::TypeError, "unreachable expression kind");
  }

  Value call(const Expr& e) {
    // Short-circuit forms first; everything else evaluates operands left to right.
    if (e.builtin == Builtin::And) return Value::boolean(eval(*e.args[0]).as_bool() && eval(*e.args[1]).as_bool());
    if (e.builtin == Builtin::Or) return Value::boolean(eval(*e.args[0]).as_bool() || eval(*e.args[1]).as_bool());

    std::vector<Value> args;
    args.reserve(e.args.size());
    for (const auto& a : e.args) args.push_back(eval(*a));
    const Value& a0 = args[0];

    switch (e.builtin) {
      case Builtin::Add:
      case Builtin::Sub:
      case Builtin::Mul: {
        if (a0.is(Value::Kind::Int)) return Value::integer(checked_int(a0.as_int(), args[1].as_int(), e.builtin));
        const double x = a0.as_dbl();
        const double y = args[1].as_dbl();
        const double r = e.builtin == Builtin::Add ? x + y : e.builtin == Builtin::Sub ? x - y : x * y;
        return Value::dbl(require_finite(r));
      }
      case Builtin::Div: return Value::dbl(require_finite(a0.as_dbl() / args[1].as_dbl()));
      case Builtin::IntDiv: return Value::integer(checked_int(a0.as_int(), args[1].as_int(), Builtin::IntDiv));
      case Builtin::Neg:
        if (a0.is(Value::Kind::Int)) return Value::integer(checked_int(0, a0.as_int(), Builtin::Sub));
        return Value::dbl(-a0.as_dbl());
      case Builtin::Lt: return Value::boolean(less(a0, args[1]));
      case Builtin::Le: return Value::boolean(!less(args[1], a0));
      case Builtin::Gt: return Value::boolean(less(args[1], a0));
      case Builtin::Ge: return Value::boolean(!less(a0, args[1]));
      case Builtin::Eq: return Value::boolean(equal(a0, args[1]));
      case Builtin::Ne: return Value::boolean(!equal(a0, args[1]));
      case Builtin::Not: return Value::boolean(!a0.as_bool());
      case Builtin::Exp: return Value::dbl(det_exp(a0.as_dbl()));
      case Builtin::Ln: return Value::dbl(det_ln(a0.as_dbl()));
      case Builtin::Logit:
      case Builtin::Relu: {
        auto f = e.builtin == Builtin::Logit ? link_logit : link_relu;
        if (a0.is(Value::Kind::Dbl)) return Value::dbl(f(a0.as_dbl()));
        auto v = to_doubles(a0);
        for (auto& x : v) x = f(x);
        return from_doubles(v);
      }
      case Builtin::Softmax: return from_doubles(link_softmax(to_doubles(a0)));
      case Builtin::Argmax: return Value::integer(argmax(to_doubles(a0)));
      case Builtin::Len: return Value::integer(static_cast<std::int64_t>(a0.as_list().size()));
      case Builtin::Dot: return dot_value(a0, args[1], e.type->is(Type::Kind::Array));
      case Builtin::VecAdd: return from_doubles(vec_add(to_doubles(a0), to_doubles(args[1])));
      case Builtin::CastDouble:
        if (a0.is(Value::Kind::Int)) return Value::dbl(static_cast<double>(a0.as_int()));
        return a0;
      case Builtin::SimpleLayers: return simple_layers(a0, args[1]);
      case Builtin::And:
      case Builtin::Or: break;
    }
    throw PfaError(ErrorKind::TypeError, "unhandled builtin");
  }

  std::vector<double> matvec(const Value& matrix, const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(matrix.as_list().size());
    for (const auto& row : matrix.as_list()) {
      const auto r = to_doubles(row);
      charge(r.size());
      out.push_back(dot(r, v));
    }
    return out;
  }

  Value dot_value(const Value& a, const Value& b, bool matrix) {
    const auto v = to_doubles(b);
    if (matrix) return from_doubles(matvec(a, v));
    const auto u = to_doubles(a);
    charge(u.size());
    return Value::dbl(dot(u, v));
  }

  static std::vector<double> vec_add(std::vector<double> a, const std::vector<double>& b) {
    if (a.size() != b.size())
      throw PfaError(ErrorKind::DimensionMismatch,
                     "adding vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = require_finite(a[i] + b[i]);
    return a;
  }

  Value simple_layers(const Value& input, const Value& layers) {
    auto cur = to_doubles(input);
    for (const auto& layer : layers.as_list()) {
      const auto& rec = layer.as_rec();
      const Value& weights = *rec.find("weights");
      const auto& activation = rec.find("activation")->as_str();
      if (activation != "logit" && activation != "relu" && activation != "linear" && activation != "softmax")
        throw PfaError(ErrorKind::UnknownActivation, "activation '" + activation + "'");
      auto z = vec_add(matvec(weights, cur), to_doubles(*rec.find("bias")));
      if (activation == "logit") {
        for (auto& x : z) x = link_logit(x);
      } else if (activation == "relu") {
        for (auto& x : z) x = link_relu(x);
      } else if (activation == "softmax") {
        z = link_softmax(z);
      }
      cur = std::move(z);
    }
    return from_doubles(cur);
  }

  const PfaDocument& doc_;
  const Value& input_;
  std::optional<std::uint64_t> budget_;
  std::vector<Value> slots_;
  std::uint64_t cost_ = 0;
};

}  // namespace

EvalResult evaluate(const PfaDocument& doc, const Value& input, std::optional<std::uint64_t> budget) {
  if (!conforms(input, *doc.input))
    throw PfaError(ErrorKind::InputSchemaMismatch, "input does not conform to " + type_to_string(*doc.input));
  Evaluator ev(doc, input, budget);
  Value out = ev.run();
  return {std::move(out), ev.cost()};
}

}  // namespace ledgerml::pfa
