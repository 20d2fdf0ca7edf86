#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace ledgerml {

struct AccountId {
  std::uint64_t value = 0;

  static constexpr AccountId system() { return AccountId{0}; }
  [[nodiscard]] constexpr bool is_system() const { return value == 0; }

  friend constexpr auto operator<=>(AccountId, AccountId) = default;
};

}  // namespace ledgerml

template <>
struct std::hash<ledgerml::AccountId> {
  std::size_t operator()(ledgerml::AccountId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
