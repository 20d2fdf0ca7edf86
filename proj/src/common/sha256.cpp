#include "ledgerml/common/sha256.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace ledgerml {

Hash32 sha256(std::span<const std::uint8_t> data) {
  Hash32 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw std::runtime_error("SHA-256 digest failed");
  return out;
}

std::array<std::uint8_t, 8> checksum8(std::span<const std::uint8_t> data) {
  auto h = sha256(data);
  std::array<std::uint8_t, 8> out{};
  std::copy_n(h.begin(), out.size(), out.begin());
  return out;
}

}  // namespace ledgerml
