#include "ledgerml/common/coin.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>

namespace ledgerml {

namespace {

using Wide = boost::multiprecision::int256_t;

const Wide kWideMax = Wide((static_cast<unsigned __int128>(1) << 127) - 1);
const Wide kWideMin = -kWideMax - 1;

Wide widen(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  Wide w = Wide(static_cast<std::uint64_t>(mag >> 64));
  w <<= 64;
  w += Wide(static_cast<std::uint64_t>(mag));
  return neg ? Wide(-w) : w;
}

__int128 narrow(const Wide& w) {
  if (w > kWideMax || w < kWideMin) throw ArithmeticError("decimal overflow");
  const bool neg = w < 0;
  Wide mag = neg ? Wide(-w) : w;
  const auto hi = static_cast<std::uint64_t>(mag >> 64);
  const auto lo = static_cast<std::uint64_t>(mag & Wide(UINT64_MAX));
  const unsigned __int128 u = (static_cast<unsigned __int128>(hi) << 64) | lo;
  return neg ? static_cast<__int128>(-u) : static_cast<__int128>(u);
}

}  // namespace

CoinAmount CoinAmount::parse(std::string_view text) {
  auto fail = [&] { return ArithmeticError("invalid decimal literal '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    neg = true;
    i = 1;
  }
  __int128 units = 0;
  int frac_digits = -1;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.') {
      if (frac_digits >= 0) throw fail();
      frac_digits = 0;
      continue;
    }
    if (c < '0' || c > '9') throw fail();
    any_digit = true;
    if (frac_digits >= 0 && ++frac_digits > kDecimals) throw fail();
    if (__builtin_mul_overflow(units, static_cast<__int128>(10), &units) ||
        __builtin_add_overflow(units, static_cast<__int128>(c - '0'), &units))
      throw ArithmeticError("decimal overflow");
  }
  if (!any_digit) throw fail();
  for (int k = std::max(frac_digits, 0); k < kDecimals; ++k)
    if (__builtin_mul_overflow(units, static_cast<__int128>(10), &units)) throw ArithmeticError("decimal overflow");
  return CoinAmount(neg ? -units : units);
}

std::string CoinAmount::to_string() const {
  const bool neg = units_ < 0;
  unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(units_) : static_cast<unsigned __int128>(units_);
  const auto scale = static_cast<unsigned __int128>(kScale);
  unsigned __int128 whole = mag / scale;
  unsigned __int128 frac = mag % scale;

  std::string int_part;
  do {
    int_part.push_back(static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole != 0);
  std::reverse(int_part.begin(), int_part.end());

  std::string frac_part(kDecimals, '0');
  for (int k = kDecimals - 1; k >= 0; --k) {
    frac_part[k] = static_cast<char>('0' + static_cast<int>(frac % 10));
    frac /= 10;
  }
  while (frac_part.size() > 1 && frac_part.back() == '0') frac_part.pop_back();
  return (neg ? "-" : "") + int_part + "." + frac_part;
}

CoinAmount operator+(CoinAmount a, CoinAmount b) {
  __int128 r;
  if (__builtin_add_overflow(a.units_, b.units_, &r)) throw ArithmeticError("decimal overflow");
  return CoinAmount(r);
}

CoinAmount operator-(CoinAmount a, CoinAmount b) {
  __int128 r;
  if (__builtin_sub_overflow(a.units_, b.units_, &r)) throw ArithmeticError("decimal overflow");
  return CoinAmount(r);
}

CoinAmount CoinAmount::operator-() const { return CoinAmount() - *this; }

CoinAmount CoinAmount::times(std::int64_t k) const {
  __int128 r;
  if (__builtin_mul_overflow(units_, static_cast<__int128>(k), &r)) throw ArithmeticError("decimal overflow");
  return CoinAmount(r);
}

CoinAmount CoinAmount::divided_by(std::int64_t k) const {
  if (k == 0) throw ArithmeticError("division by zero");
  return CoinAmount(units_ / k);
}

CoinAmount CoinAmount::times(CoinAmount o) const {
  return CoinAmount(narrow(widen(units_) * widen(o.units_) / widen(kScale)));
}

CoinAmount CoinAmount::divided_by(CoinAmount o) const {
  if (o.units_ == 0) throw ArithmeticError("division by zero");
  return CoinAmount(narrow(widen(units_) * widen(kScale) / widen(o.units_)));
}

}  // namespace ledgerml
