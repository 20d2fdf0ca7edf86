#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerml/ledger/ledger.hpp"
#include "ledgerml/ledger/types.hpp"

namespace ledgerml::store {

enum class StoreErrorCode { HeightGap, IoFailure, Corruption, ChecksumMismatch, RootMismatch, Locked };

std::string_view store_error_name(StoreErrorCode c);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrorCode code, std::string detail, std::optional<std::uint64_t> height = std::nullopt);
  [[nodiscard]] StoreErrorCode code() const { return code_; }
  /// Height of the offending block for Corruption and HeightGap.
  [[nodiscard]] std::optional<std::uint64_t> height() const { return height_; }

 private:
  StoreErrorCode code_;
  std::optional<std::uint64_t> height_;
};

inline constexpr const char* kBlockLogFile = "chain.blocklog";
inline constexpr const char* kSnapshotFile = "state.snapshot";
inline constexpr const char* kGenesisFile = "genesis.json";
inline constexpr const char* kLockFile = "LOCK";

/// Append-only block file. Each entry is [u32 BE length][block bytes]
/// [first 8 bytes of SHA-256 of the block bytes]. Opening scans the whole
/// file; an incomplete or mis-checksummed final entry is cut off.
class BlockLog {
 public:
  static BlockLog open(const std::filesystem::path& path);
  BlockLog(BlockLog&& other) noexcept;
  BlockLog& operator=(BlockLog&& other) noexcept;
  BlockLog(const BlockLog&) = delete;
  BlockLog& operator=(const BlockLog&) = delete;
  ~BlockLog();

  [[nodiscard]] const std::vector<ledger::Block>& blocks() const { return blocks_; }
  [[nodiscard]] std::optional<std::uint64_t> last_height() const;
  /// Bytes removed from the tail while opening.
  [[nodiscard]] std::uint64_t truncated_bytes() const { return truncated_; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

  /// Durable (fsync) before returning. The first block may have height 0 or 1.
  void append(const ledger::Block& block);

 private:
  BlockLog() = default;

  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<ledger::Block> blocks_;
  std::uint64_t truncated_ = 0;
};

/// Serialises one log entry.
Bytes encode_log_entry(const ledger::Block& block);

struct ReplayResult {
  ledger::ChainState state;
  std::vector<std::vector<ledger::TxReceipt>> receipts;
};

/// Applies every block above start.height in order. A block that fails to
/// apply (bad link, invalid transaction, root mismatch) raises Corruption.
ReplayResult replay(const ledger::ChainState& start, const std::vector<ledger::Block>& blocks,
                    ledger::ExecutionCache* cache = nullptr);

/// Opens the log at `path` and replays it on top of `genesis`. A stored
/// height-0 block must equal genesis_block(genesis).
ledger::ChainState load_chain(const std::filesystem::path& path, const ledger::ChainState& genesis,
                              ledger::ExecutionCache* cache = nullptr);

/// Snapshot layout: "LMSNAP01", u64 height, state root, head hash,
/// u32-prefixed state bytes, 8-byte checksum of everything before it.
/// Written to a temporary file and renamed into place.
void write_snapshot(const std::filesystem::path& path, const ledger::ChainState& state);
Bytes encode_snapshot(const ledger::ChainState& state);
ledger::ChainState read_snapshot(const std::filesystem::path& path);
ledger::ChainState decode_snapshot(std::span<const std::uint8_t> bytes);

/// Exclusive advisory lock on <dir>/LOCK, held for the object's lifetime.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;
  ~DirLock();

 private:
  int fd_ = -1;
};

Bytes read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, with fsync.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data);

}  // namespace ledgerml::store
