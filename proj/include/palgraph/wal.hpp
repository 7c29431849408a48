/** Copyright 2026 The palgraph Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "palgraph/file_util.hpp"

namespace palgraph {

/// Write-ahead log of buffer operations:
///   header(aux = generation) | { u32 length | u32 crc32(payload) | payload }*
/// The generation ties the log to the MANIFEST that must accompany it.
/// Appends are ordered by sequence number; sync(lsn) blocks until every
/// record up to lsn is on disk, and concurrent callers share one fdatasync.
class Wal {
 public:
  struct Contents {
    std::uint32_t generation = 0;
    std::vector<std::vector<std::byte>> records;
    std::uint64_t torn_bytes = 0;  ///< bytes cut from a damaged tail
  };

  /// Reads an existing log, truncating a torn tail, and reopens it for append.
  static std::unique_ptr<Wal> open(const fs::path& path, Contents* contents);
  /// Reads without modifying the file.
  static Contents read(const fs::path& path);
  /// Creates (or replaces) a log holding `records`, synced before returning.
  static std::unique_ptr<Wal> create(const fs::path& path, std::uint32_t generation,
                                     std::span<const std::vector<std::byte>> records);

  std::uint32_t generation() const noexcept { return generation_; }

  /// Returns the sequence number of the record.
  std::uint64_t append(std::span<const std::byte> payload);
  void sync(std::uint64_t lsn);

  /// Switches to `next` (already durable). Everything appended so far is
  /// treated as durable because its effects are in `next` or in partitions.
  void adopt(Wal&& next);

  std::uint64_t syncs() const;

 private:
  Wal() = default;

  File file_;
  std::uint32_t generation_ = 0;
  std::uint64_t end_ = 0;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t appended_ = 0;
  std::uint64_t synced_ = 0;
  bool syncing_ = false;
  std::uint64_t sync_count_ = 0;
};

}  // namespace palgraph
