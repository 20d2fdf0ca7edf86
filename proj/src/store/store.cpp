#include "ledgerml/store/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ledgerml/common/sha256.hpp"
#include "ledgerml/ledger/codec.hpp"
#include "ledgerml/ledger/genesis.hpp"

namespace ledgerml::store {

namespace fs = std::filesystem;

std::string_view store_error_name(StoreErrorCode c) {
  switch (c) {
    case StoreErrorCode::HeightGap: return "HeightGap";
    case StoreErrorCode::IoFailure: return "IoFailure";
    case StoreErrorCode::Corruption: return "Corruption";
    case StoreErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case StoreErrorCode::RootMismatch: return "RootMismatch";
    case StoreErrorCode::Locked: return "Locked";
  }
  return "?";
}

StoreError::StoreError(StoreErrorCode code, std::string detail, std::optional<std::uint64_t> height)
    : std::runtime_error(std::string(store_error_name(code)) +
                         (height ? "(" + std::to_string(*height) + ")" : std::string()) + ": " + detail),
      code_(code),
      height_(height) {}

namespace {

[[noreturn]] void io_fail(const std::string& what, const fs::path& p) {
  throw StoreError(StoreErrorCode::IoFailure, what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::span<const std::uint8_t> data, const fs::path& p) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write", p);
    }
    off += static_cast<std::size_t>(n);
  }
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

}  // namespace

Bytes read_file(const fs::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) io_fail("open", path);
  Bytes out;
  std::uint8_t buf[1 << 16];
  while (true) {
    const auto n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_fail("read", path);
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  ::close(fd);
  return out;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> data) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("create", tmp);
  try {
    write_all(fd, data, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_fail("fsync", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) io_fail("rename", tmp);
}

Bytes encode_log_entry(const ledger::Block& block) {
  const Bytes body = ledger::encode_block(block);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(body);
  w.raw(checksum8(body));
  return std::move(w).take();
}

BlockLog BlockLog::open(const fs::path& path) {
  BlockLog log;
  log.path_ = path;
  log.fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (log.fd_ < 0) io_fail("open", path);

  const Bytes data = read_file(path);
  std::size_t off = 0;
  while (off < data.size()) {
    const std::size_t left = data.size() - off;
    bool torn = left < 4;
    std::size_t len = 0;
    if (!torn) {
      len = be32(data.data() + off);
      torn = left < 4 + len + 8;
    }
    const bool is_final = torn || off + 4 + len + 8 == data.size();
    if (!torn) {
      std::span<const std::uint8_t> body(data.data() + off + 4, len);
      const auto sum = checksum8(body);
      if (!std::equal(sum.begin(), sum.end(), data.data() + off + 4 + len)) {
        if (!is_final) {
          const auto h = log.blocks_.empty() ? 0 : log.blocks_.back().height + 1;
          throw StoreError(StoreErrorCode::Corruption, "checksum mismatch in entry at offset " + std::to_string(off), h);
        }
        torn = true;
      }
    }
    if (torn) {
      log.truncated_ = data.size() - off;
      if (::ftruncate(log.fd_, static_cast<off_t>(off)) != 0) io_fail("truncate", path);
      if (::fsync(log.fd_) != 0) io_fail("fsync", path);
      break;
    }
    ledger::Block b;
    try {
      b = ledger::decode_block(std::span(data.data() + off + 4, len));
    } catch (const DecodeError& e) {
      const auto h = log.blocks_.empty() ? 0 : log.blocks_.back().height + 1;
      throw StoreError(StoreErrorCode::Corruption, std::string("undecodable block: ") + e.what(), h);
    }
    if (!log.blocks_.empty() && b.height != log.blocks_.back().height + 1)
      throw StoreError(StoreErrorCode::Corruption, "heights not consecutive", b.height);
    log.blocks_.push_back(std::move(b));
    off += 4 + len + 8;
  }
  if (::lseek(log.fd_, 0, SEEK_END) < 0) io_fail("seek", path);
  return log;
}

BlockLog::BlockLog(BlockLog&& other) noexcept
    : path_(std::move(other.path_)),
      fd_(std::exchange(other.fd_, -1)),
      blocks_(std::move(other.blocks_)),
      truncated_(other.truncated_) {}

BlockLog& BlockLog::operator=(BlockLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    fd_ = std::exchange(other.fd_, -1);
    blocks_ = std::move(other.blocks_);
    truncated_ = other.truncated_;
  }
  return *this;
}

BlockLog::~BlockLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<std::uint64_t> BlockLog::last_height() const {
  if (blocks_.empty()) return std::nullopt;
  return blocks_.back().height;
}

void BlockLog::append(const ledger::Block& block) {
  if (blocks_.empty() ? block.height > 1 : block.height != blocks_.back().height + 1) {
    const std::string want = blocks_.empty() ? "0 or 1" : std::to_string(blocks_.back().height + 1);
    throw StoreError(StoreErrorCode::HeightGap, "expected height " + want + ", got " + std::to_string(block.height),
                     block.height);
  }
  const Bytes entry = encode_log_entry(block);
  write_all(fd_, entry, path_);
  if (::fsync(fd_) != 0) io_fail("fsync", path_);
  blocks_.push_back(block);
}

ReplayResult replay(const ledger::ChainState& start, const std::vector<ledger::Block>& blocks,
                    ledger::ExecutionCache* cache) {
  ReplayResult out{start, {}};
  for (const auto& b : blocks) {
    if (b.height <= out.state.height) continue;
    try {
      auto r = ledger::apply_block(out.state, b, cache);
      out.state = std::move(r.state);
      out.receipts.push_back(std::move(r.receipts));
    } catch (const ledger::LedgerError& e) {
      throw StoreError(StoreErrorCode::Corruption, e.what(), b.height);
    }
  }
  return out;
}

ledger::ChainState load_chain(const fs::path& path, const ledger::ChainState& genesis, ledger::ExecutionCache* cache) {
  BlockLog log = BlockLog::open(path);
  const auto& blocks = log.blocks();
  if (!blocks.empty() && blocks.front().height == 0 && !(blocks.front() == ledger::genesis_block(genesis)))
    throw StoreError(StoreErrorCode::Corruption, "stored genesis block does not match the genesis state", 0);
  return replay(genesis, blocks, cache).state;
}

namespace {

constexpr std::string_view kSnapMagic = "LMSNAP01";

}  // namespace

Bytes encode_snapshot(const ledger::ChainState& state) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kSnapMagic.data()), kSnapMagic.size()));
  w.u64(state.height);
  w.hash(ledger::compute_state_root(state));
  w.hash(state.head_hash);
  w.bytes(ledger::encode_state(state));
  const auto sum = checksum8(w.data());
  w.raw(sum);
  return std::move(w).take();
}

ledger::ChainState decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSnapMagic.size() + 8)
    throw StoreError(StoreErrorCode::ChecksumMismatch, "snapshot too short");
  const auto body = bytes.first(bytes.size() - 8);
  const auto sum = checksum8(body);
  if (!std::equal(sum.begin(), sum.end(), bytes.data() + body.size()))
    throw StoreError(StoreErrorCode::ChecksumMismatch, "snapshot checksum does not match");
  if (!std::equal(kSnapMagic.begin(), kSnapMagic.end(), body.begin()))
    throw StoreError(StoreErrorCode::Corruption, "not a snapshot file");
  try {
    ByteReader r(body.subspan(kSnapMagic.size()));
    const auto height = r.u64();
    const auto root = r.hash();
    const auto head = r.hash();
    const Bytes state_bytes = r.bytes();
    r.expect_done();
    ledger::ChainState s = ledger::decode_state(state_bytes);
    s.head_hash = head;
    if (s.height != height) throw StoreError(StoreErrorCode::RootMismatch, "header height differs from state height");
    if (ledger::compute_state_root(s) != root)
      throw StoreError(StoreErrorCode::RootMismatch, "recomputed state root differs from the recorded one");
    return s;
  } catch (const DecodeError& e) {
    throw StoreError(StoreErrorCode::Corruption, std::string("undecodable snapshot: ") + e.what());
  }
}

void write_snapshot(const fs::path& path, const ledger::ChainState& state) {
  write_file_atomic(path, encode_snapshot(state));
}

ledger::ChainState read_snapshot(const fs::path& path) { return decode_snapshot(read_file(path)); }

DirLock::DirLock(const fs::path& dir) {
  const fs::path p = dir / kLockFile;
  fd_ = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) io_fail("open", p);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw StoreError(StoreErrorCode::Locked, "data directory " + dir.string() + " is in use by another process");
  }
}

DirLock::~DirLock() {
  if (fd_ >= 0) ::close(fd_);
}

}  // namespace ledgerml::store
