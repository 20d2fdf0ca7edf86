#include "ledgerml/common/bytes.hpp"

namespace ledgerml {

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::i128(__int128 v) {
  const auto u = static_cast<unsigned __int128>(v);
  u64(static_cast<std::uint64_t>(u >> 64));
  u64(static_cast<std::uint64_t>(u));
}

void ByteWriter::raw(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }

void ByteWriter::bytes(std::span<const std::uint8_t> data) {
  if (data.size() > UINT32_MAX) throw std::length_error("field exceeds u32 length prefix");
  u32(static_cast<std::uint32_t>(data.size()));
  raw(data);
}

void ByteWriter::str(std::string_view s) {
  bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) throw DecodeError("unexpected end of input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = (v << 8) | b;
  return v;
}

__int128 ByteReader::i128() {
  const unsigned __int128 hi = u64();
  const unsigned __int128 lo = u64();
  return static_cast<__int128>((hi << 64) | lo);
}

Bytes ByteReader::raw(std::size_t n) {
  auto s = take(n);
  return Bytes(s.begin(), s.end());
}

Bytes ByteReader::bytes() { return raw(u32()); }

std::string ByteReader::str() {
  auto s = take(u32());
  return std::string(s.begin(), s.end());
}

Hash32 ByteReader::hash() {
  Hash32 h{};
  auto s = take(h.size());
  std::copy(s.begin(), s.end(), h.begin());
  return h;
}

void ByteReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes after canonical value");
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw DecodeError(std::string("invalid hex digit '") + c + "'");
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DecodeError("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  return out;
}

Hash32 hash_from_hex(std::string_view hex) {
  auto raw = from_hex(hex);
  if (raw.size() != 32) throw DecodeError("hash must be 32 bytes");
  Hash32 h{};
  std::copy(raw.begin(), raw.end(), h.begin());
  return h;
}

}  // namespace ledgerml
