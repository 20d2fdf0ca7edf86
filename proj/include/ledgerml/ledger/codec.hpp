#pragma once

#include "ledgerml/ledger/types.hpp"

namespace ledgerml::ledger {

void encode_transaction(ByteWriter& w, const Transaction& tx);
Transaction decode_transaction(ByteReader& r);

Bytes encode_block(const Block& b);
/// Throws DecodeError on malformed or trailing bytes.
Block decode_block(std::span<const std::uint8_t> bytes);

/// Canonical state bytes hashed into the state root (head_hash excluded).
Bytes encode_state(const ChainState& s);
ChainState decode_state(std::span<const std::uint8_t> bytes);

Hash32 compute_state_root(const ChainState& s);
Hash32 hash_block(const Block& b);

}  // namespace ledgerml::ledger
