#pragma once

#include <string>

#include "ledgerml/common/coin.hpp"

namespace ledgerml {

inline constexpr std::size_t kMaxAssetIdBytes = 64;

struct Asset {
  std::string id;
  CoinAmount amount;

  friend bool operator==(const Asset&, const Asset&) = default;
};

}  // namespace ledgerml
