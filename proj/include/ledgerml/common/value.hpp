#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ledgerml/common/bytes.hpp"
#include "ledgerml/common/coin.hpp"

namespace ledgerml {

class Value;

using List = std::vector<Value>;

/// Ordered record: field order is part of the value.
struct Record {
  std::vector<std::string> keys;
  std::vector<Value> values;

  [[nodiscard]] const Value* find(std::string_view key) const;
  void set(std::string key, Value v);
  [[nodiscard]] std::size_t size() const { return keys.size(); }
};

struct ModelRef {
  std::uint32_t index = 0;
  friend bool operator==(ModelRef, ModelRef) = default;
};

struct BytesValue {
  Bytes data;
};

/// Runtime value shared by the contract interpreter and the scoring engine.
class Value {
 public:
  enum class Kind : std::uint8_t { None = 0, Int, Dec, Dbl, Str, Bool, Bytes, List, Rec, Model };

  Value() = default;

  static Value integer(std::int64_t v) { return Value(Repr(std::in_place_index<1>, v)); }
  static Value decimal(CoinAmount v) { return Value(Repr(std::in_place_index<2>, v)); }
  static Value dbl(double v) { return Value(Repr(std::in_place_index<3>, v)); }
  static Value str(std::string v) { return Value(Repr(std::in_place_index<4>, std::move(v))); }
  static Value boolean(bool v) { return Value(Repr(std::in_place_index<5>, v)); }
  static Value bytes(Bytes v) { return Value(Repr(std::in_place_index<6>, BytesValue{std::move(v)})); }
  static Value list(List v) { return Value(Repr(std::in_place_index<7>, std::move(v))); }
  static Value record(Record v) { return Value(Repr(std::in_place_index<8>, std::move(v))); }
  static Value model(ModelRef v) { return Value(Repr(std::in_place_index<9>, v)); }

  [[nodiscard]] Kind kind() const { return static_cast<Kind>(repr_.index()); }
  [[nodiscard]] bool is(Kind k) const { return kind() == k; }
  [[nodiscard]] bool is_none() const { return is(Kind::None); }

  [[nodiscard]] std::int64_t as_int() const { return std::get<1>(repr_); }
  [[nodiscard]] CoinAmount as_dec() const { return std::get<2>(repr_); }
  [[nodiscard]] double as_dbl() const { return std::get<3>(repr_); }
  [[nodiscard]] const std::string& as_str() const { return std::get<4>(repr_); }
  [[nodiscard]] bool as_bool() const { return std::get<5>(repr_); }
  [[nodiscard]] const Bytes& as_bytes() const { return std::get<6>(repr_).data; }
  [[nodiscard]] const List& as_list() const { return std::get<7>(repr_); }
  [[nodiscard]] const Record& as_rec() const { return std::get<8>(repr_); }
  [[nodiscard]] ModelRef as_model() const { return std::get<9>(repr_); }

  /// Structural equality; doubles compare by bit pattern.
  friend bool operator==(const Value& a, const Value& b);

 private:
  using Repr = std::variant<std::monostate, std::int64_t, CoinAmount, double, std::string, bool, BytesValue, List,
                            Record, ModelRef>;
  explicit Value(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

std::string_view kind_name(Value::Kind k);

/// Canonical binary encoding: one tag byte followed by a fixed-layout payload.
void encode_value(ByteWriter& w, const Value& v);
Bytes encode_value(const Value& v);
Value decode_value(ByteReader& r);

/// Shortest round-trip decimal form, always containing '.' or an exponent.
std::string format_double(double d);

/// Human rendering used by string concatenation and log lines.
std::string render_value(const Value& v);

}  // namespace ledgerml
