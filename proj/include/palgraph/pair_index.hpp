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

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "palgraph/core.hpp"
#include "palgraph/file_util.hpp"

namespace palgraph {

/// (vertex, first edge-array position) pair. Both columns strictly increase
/// along an index.
struct IndexEntry {
  std::uint64_t key = 0;
  std::uint64_t pos = 0;
  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

/// Result of a key lookup: the entry and where the next entry starts.
struct IndexRange {
  std::uint64_t first = 0;
  std::uint64_t next = 0;  ///< next entry's pos, or `end` passed to find()
};

/// Sorted (vertex, position) index of one partition: the out-start index or
/// the in-start index. Lookups charge the I/O they would cost in `stats`.
class PairIndex {
 public:
  virtual ~PairIndex() = default;

  virtual std::uint64_t size() const noexcept = 0;
  /// Exact key lookup. `end` is returned as `next` for the last entry.
  virtual std::optional<IndexRange> find(std::uint64_t key, std::uint64_t end,
                                         IoStats* stats) const = 0;
  /// Entry with the greatest pos <= `pos`. Requires size() > 0 and
  /// pos >= first entry's pos.
  virtual IndexEntry predecessor(std::uint64_t pos, IoStats* stats) const = 0;
  /// Sequential decode of every entry.
  virtual std::vector<IndexEntry> entries(IoStats* stats) const = 0;

  virtual std::uint64_t file_bytes() const noexcept = 0;
  virtual std::uint64_t memory_bytes() const noexcept = 0;
  /// Size of the same index in raw 16-byte-per-entry form.
  std::uint64_t raw_bytes() const noexcept { return size() * 16; }
};

/// Keys must strictly increase; positions too when `ordered_pos`.
void validate_index_entries(std::span<const IndexEntry> entries, bool ordered_pos = true);

/// Elias-Gamma delta-coded pairs, resident in memory. Every kSampleStride-th
/// entry is sampled with its bit offset so a lookup decodes at most one block.
class GammaPairIndex final : public PairIndex {
 public:
  static constexpr std::uint64_t kSampleStride = 64;

  static GammaPairIndex encode(std::span<const IndexEntry> entries);
  static void write_file(const fs::path& path, std::span<const IndexEntry> entries,
                         bool sync, std::uint64_t* bytes_out = nullptr);
  static std::unique_ptr<GammaPairIndex> open_file(const fs::path& path);

  std::uint64_t size() const noexcept override { return count_; }
  std::optional<IndexRange> find(std::uint64_t key, std::uint64_t end,
                                 IoStats* stats) const override;
  IndexEntry predecessor(std::uint64_t pos, IoStats* stats) const override;
  std::vector<IndexEntry> entries(IoStats* stats) const override;
  std::uint64_t file_bytes() const noexcept override {
    return kFileHeaderSize + 16 + words_.size() * 8;
  }
  std::uint64_t memory_bytes() const noexcept override {
    return words_.size() * 8 + samples_.size() * sizeof(Sample);
  }
  std::uint64_t bit_count() const noexcept { return bit_count_; }

 private:
  struct Sample {
    std::uint64_t bit = 0;        // start of entry s * stride
    std::uint64_t prev_key1 = 0;  // key + 1 of the preceding entry, 0 for the first
    std::uint64_t prev_pos1 = 0;
    std::uint64_t first_key = 0;  // key of entry s * stride
    std::uint64_t first_pos = 0;
  };
  void build_samples();

  std::vector<std::uint64_t> words_;
  std::uint64_t bit_count_ = 0;
  std::uint64_t count_ = 0;
  std::vector<Sample> samples_;
};

/// Raw on-disk pairs (u64 key, u64 pos). In `sparse` mode every stride-th
/// entry is held in memory so a lookup reads a single block range; in
/// `binary` mode each probe of the on-disk binary search is a positioned read.
class DiskPairIndex final : public PairIndex {
 public:
  enum class Mode { sparse, binary };

  /// The in-start index passes ordered_pos = false; predecessor() is then
  /// meaningless and must not be used.
  static void write_file(const fs::path& path, const Magic& magic,
                         std::span<const IndexEntry> entries, bool sync,
                         std::uint64_t* bytes_out = nullptr, bool ordered_pos = true);
  static std::unique_ptr<DiskPairIndex> open_file(const fs::path& path, const Magic& magic,
                                                  Mode mode, std::uint32_t stride,
                                                  std::uint32_t block_size);

  std::uint64_t size() const noexcept override { return count_; }
  std::optional<IndexRange> find(std::uint64_t key, std::uint64_t end,
                                 IoStats* stats) const override;
  IndexEntry predecessor(std::uint64_t pos, IoStats* stats) const override;
  std::vector<IndexEntry> entries(IoStats* stats) const override;
  std::uint64_t file_bytes() const noexcept override {
    return kFileHeaderSize + count_ * 16;
  }
  std::uint64_t memory_bytes() const noexcept override {
    return sparse_.size() * sizeof(IndexEntry);
  }

 private:
  IndexEntry read_entry(std::uint64_t i) const;
  std::vector<IndexEntry> read_range(std::uint64_t first, std::uint64_t count,
                                     IoStats* stats) const;
  /// Narrows [lo, hi) via the sparse samples on `key` or `pos`.
  void narrow(bool by_pos, std::uint64_t value, std::uint64_t& lo, std::uint64_t& hi) const;
  template <typename Less>
  std::uint64_t disk_upper_bound(std::uint64_t lo, std::uint64_t hi, Less less,
                                 IoStats* stats) const;

  File file_;
  Mode mode_ = Mode::sparse;
  std::uint32_t stride_ = 128;
  std::uint32_t block_size_ = 4096;
  std::uint64_t count_ = 0;
  std::vector<IndexEntry> sparse_;  // entry i * stride_
};

}  // namespace palgraph
