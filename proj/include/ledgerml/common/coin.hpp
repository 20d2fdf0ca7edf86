#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ledgerml {

class ArithmeticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact fixed-point decimal: a signed 128-bit count of 10^-18 units.
/// Overflow and division by zero throw ArithmeticError.
class CoinAmount {
 public:
  static constexpr int kDecimals = 18;
  static constexpr __int128 kScale = static_cast<__int128>(1'000'000'000'000'000'000LL);

  constexpr CoinAmount() = default;
  static constexpr CoinAmount from_units(__int128 units) { return CoinAmount(units); }
  static CoinAmount from_whole(std::int64_t whole) { return CoinAmount(static_cast<__int128>(whole) * kScale); }
  /// Parses `[-]digits[.digits]` with at most 18 fractional digits.
  static CoinAmount parse(std::string_view text);

  [[nodiscard]] constexpr __int128 units() const { return units_; }
  [[nodiscard]] constexpr bool is_negative() const { return units_ < 0; }
  [[nodiscard]] constexpr bool is_zero() const { return units_ == 0; }

  /// Canonical rendering: trailing zeros trimmed, at least one fractional digit.
  [[nodiscard]] std::string to_string() const;

  friend CoinAmount operator+(CoinAmount a, CoinAmount b);
  friend CoinAmount operator-(CoinAmount a, CoinAmount b);
  CoinAmount operator-() const;
  CoinAmount& operator+=(CoinAmount o) { return *this = *this + o; }
  CoinAmount& operator-=(CoinAmount o) { return *this = *this - o; }

  [[nodiscard]] CoinAmount times(std::int64_t k) const;
  /// Truncates toward zero.
  [[nodiscard]] CoinAmount divided_by(std::int64_t k) const;
  [[nodiscard]] CoinAmount times(CoinAmount o) const;
  [[nodiscard]] CoinAmount divided_by(CoinAmount o) const;

  friend constexpr auto operator<=>(CoinAmount, CoinAmount) = default;
  friend constexpr bool operator==(CoinAmount, CoinAmount) = default;

 private:
  constexpr explicit CoinAmount(__int128 units) : units_(units) {}
  __int128 units_ = 0;
};

}  // namespace ledgerml
