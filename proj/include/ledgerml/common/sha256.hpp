#pragma once

#include <span>

#include "ledgerml/common/bytes.hpp"

namespace ledgerml {

Hash32 sha256(std::span<const std::uint8_t> data);

/// First 8 bytes of SHA-256, used as a record checksum.
std::array<std::uint8_t, 8> checksum8(std::span<const std::uint8_t> data);

}  // namespace ledgerml
