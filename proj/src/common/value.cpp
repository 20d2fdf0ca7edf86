#include "ledgerml/common/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>

namespace ledgerml {

const Value* Record::find(std::string_view key) const {
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i] == key) return &values[i];
  return nullptr;
}

void Record::set(std::string key, Value v) {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] == key) {
      values[i] = std::move(v);
      return;
    }
  }
  keys.push_back(std::move(key));
  values.push_back(std::move(v));
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::None: return true;
    case Value::Kind::Int: return a.as_int() == b.as_int();
    case Value::Kind::Dec: return a.as_dec() == b.as_dec();
    case Value::Kind::Dbl: return std::bit_cast<std::uint64_t>(a.as_dbl()) == std::bit_cast<std::uint64_t>(b.as_dbl());
    case Value::Kind::Str: return a.as_str() == b.as_str();
    case Value::Kind::Bool: return a.as_bool() == b.as_bool();
    case Value::Kind::Bytes: return a.as_bytes() == b.as_bytes();
    case Value::Kind::List: return a.as_list() == b.as_list();
    case Value::Kind::Rec: return a.as_rec().keys == b.as_rec().keys && a.as_rec().values == b.as_rec().values;
    case Value::Kind::Model: return a.as_model() == b.as_model();
  }
  return false;
}

std::string_view kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::None: return "none";
    case Value::Kind::Int: return "int";
    case Value::Kind::Dec: return "dec";
    case Value::Kind::Dbl: return "double";
    case Value::Kind::Str: return "string";
    case Value::Kind::Bool: return "bool";
    case Value::Kind::Bytes: return "bytes";
    case Value::Kind::List: return "list";
    case Value::Kind::Rec: return "record";
    case Value::Kind::Model: return "model";
  }
  return "?";
}

void encode_value(ByteWriter& w, const Value& v) {
  w.u8(static_cast<std::uint8_t>(v.kind()));
  switch (v.kind()) {
    case Value::Kind::None: break;
    case Value::Kind::Int: w.i64(v.as_int()); break;
    case Value::Kind::Dec: w.i128(v.as_dec().units()); break;
    case Value::Kind::Dbl: w.u64(std::bit_cast<std::uint64_t>(v.as_dbl())); break;
    case Value::Kind::Str: w.str(v.as_str()); break;
    case Value::Kind::Bool: w.u8(v.as_bool() ? 1 : 0); break;
    case Value::Kind::Bytes: w.bytes(v.as_bytes()); break;
    case Value::Kind::List:
      w.u32(static_cast<std::uint32_t>(v.as_list().size()));
      for (const auto& item : v.as_list()) encode_value(w, item);
      break;
    case Value::Kind::Rec: {
      const auto& rec = v.as_rec();
      w.u32(static_cast<std::uint32_t>(rec.size()));
      for (std::size_t i = 0; i < rec.size(); ++i) {
        w.str(rec.keys[i]);
        encode_value(w, rec.values[i]);
      }
      break;
    }
    case Value::Kind::Model: w.u32(v.as_model().index); break;
  }
}

Bytes encode_value(const Value& v) {
  ByteWriter w;
  encode_value(w, v);
  return std::move(w).take();
}

namespace {
Value decode_value_at(ByteReader& r, int depth) {
  if (depth > 64) throw DecodeError("value nesting too deep");
  const auto tag = r.u8();
  switch (static_cast<Value::Kind>(tag)) {
    case Value::Kind::None: return Value();
    case Value::Kind::Int: return Value::integer(r.i64());
    case Value::Kind::Dec: return Value::decimal(CoinAmount::from_units(r.i128()));
    case Value::Kind::Dbl: return Value::dbl(std::bit_cast<double>(r.u64()));
    case Value::Kind::Str: return Value::str(r.str());
    case Value::Kind::Bool: {
      const auto b = r.u8();
      if (b > 1) throw DecodeError("invalid bool byte");
      return Value::boolean(b == 1);
    }
    case Value::Kind::Bytes: return Value::bytes(r.bytes());
    case Value::Kind::List: {
      const auto n = r.u32();
      if (n > r.remaining()) throw DecodeError("list length exceeds input");
      List items;
      items.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) items.push_back(decode_value_at(r, depth + 1));
      return Value::list(std::move(items));
    }
    case Value::Kind::Rec: {
      const auto n = r.u32();
      if (n > r.remaining()) throw DecodeError("record length exceeds input");
      Record rec;
      for (std::uint32_t i = 0; i < n; ++i) {
        rec.keys.push_back(r.str());
        rec.values.push_back(decode_value_at(r, depth + 1));
      }
      return Value::record(std::move(rec));
    }
    case Value::Kind::Model: return Value::model(ModelRef{r.u32()});
  }
  throw DecodeError("unknown value tag " + std::to_string(tag));
}
}  // namespace

Value decode_value(ByteReader& r) { return decode_value_at(r, 0); }

std::string format_double(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string out(buf, res.ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string render_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None: return "none";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Dec: return v.as_dec().to_string();
    case Value::Kind::Dbl: return format_double(v.as_dbl());
    case Value::Kind::Str: return v.as_str();
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Bytes: return "0x" + to_hex(v.as_bytes());
    case Value::Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.as_list().size(); ++i) {
        if (i) out += ", ";
        out += render_value(v.as_list()[i]);
      }
      return out + "]";
    }
    case Value::Kind::Rec: {
      const auto& rec = v.as_rec();
      std::string out = "{";
      for (std::size_t i = 0; i < rec.size(); ++i) {
        if (i) out += ", ";
        out += rec.keys[i] + ": " + render_value(rec.values[i]);
      }
      return out + "}";
    }
    case Value::Kind::Model: return "model#" + std::to_string(v.as_model().index);
  }
  return {};
}

}  // namespace ledgerml
