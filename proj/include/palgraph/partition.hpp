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

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "palgraph/columns.hpp"
#include "palgraph/core.hpp"
#include "palgraph/file_util.hpp"
#include "palgraph/pair_index.hpp"

namespace palgraph {

/// Packed edge-array word: dst in bits 0-35, type in 36-39, forward delta to
/// the next entry with the same dst in 40-63 (kChainStop ends the chain).
namespace entry {
inline constexpr std::uint64_t kDstMask = kMaxVertexIdSpace - 1;

constexpr std::uint64_t pack(InternalId dst, std::uint8_t type, std::uint64_t next) noexcept {
  return (dst & kDstMask) | (std::uint64_t{type & 15u} << kVertexIdBits) |
         (next << (kVertexIdBits + kTypeBits));
}
constexpr InternalId dst(std::uint64_t w) noexcept { return w & kDstMask; }
constexpr std::uint8_t type(std::uint64_t w) noexcept {
  return static_cast<std::uint8_t>((w >> kVertexIdBits) & 15u);
}
constexpr std::uint64_t next(std::uint64_t w) noexcept {
  return w >> (kVertexIdBits + kTypeBits);
}
constexpr std::uint64_t with_type(std::uint64_t w, std::uint8_t t) noexcept {
  return (w & ~(std::uint64_t{15} << kVertexIdBits)) | (std::uint64_t{t & 15u} << kVertexIdBits);
}
}  // namespace entry

/// Edges sorted by (src, dst, arrival) with one attribute row per edge laid
/// out by a Schema. Input to partition construction and output of loads.
struct EdgeRun {
  std::vector<EdgeTuple> edges;
  std::vector<std::byte> rows;
  std::size_t row_width = 0;

  std::size_t size() const noexcept { return edges.size(); }
  std::span<const std::byte> row(std::size_t i) const {
    return {rows.data() + i * row_width, row_width};
  }
  void push(const EdgeTuple& e, std::span<const std::byte> r) {
    edges.push_back(e);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  void reserve(std::size_t n) {
    edges.reserve(n);
    rows.reserve(n * row_width);
  }
};

/// Stable two-way merge; on equal (src, dst) edges from `older` come first.
EdgeRun merge_runs(const EdgeRun& older, const EdgeRun& newer);

/// Identity and coverage of one partition. The covered internal IDs are
/// [lo, hi], the union of a contiguous range of leaf intervals.
struct PartitionInfo {
  std::uint32_t level = 1;
  std::uint32_t index = 0;
  std::uint64_t uid = 0;
  InternalId lo = 0;
  InternalId hi = 0;
};

/// One edge as found in a partition.
struct PartitionEdge {
  std::uint64_t pos = 0;
  EdgeTuple edge;
};

fs::path partition_dir(const fs::path& db_root, std::uint32_t level, std::uint64_t uid);

/// Immutable on-disk edge partition. Only the type field of edge words and
/// the attribute cells change after construction.
class EdgePartition {
 public:
  struct BuildOptions {
    bool sync = true;
    IoStats* stats = nullptr;
  };

  /// Writes a new partition directory from a sorted run. Files are written
  /// into a temporary directory which is renamed into place last.
  static std::shared_ptr<EdgePartition> build(const fs::path& db_root, const PartitionInfo& info,
                                              const EdgeRun& run, const Schema& schema,
                                              const DbConfig& cfg, const BuildOptions& opts);
  static std::shared_ptr<EdgePartition> open(const fs::path& db_root, const PartitionInfo& info,
                                             const DbConfig& cfg);

  ~EdgePartition();
  EdgePartition(const EdgePartition&) = delete;
  EdgePartition& operator=(const EdgePartition&) = delete;

  const PartitionInfo& info() const noexcept { return info_; }
  std::uint64_t uid() const noexcept { return info_.uid; }
  std::uint64_t edge_count() const noexcept { return count_; }
  const fs::path& dir() const noexcept { return dir_; }
  bool covers(InternalId v) const noexcept { return v >= info_.lo && v <= info_.hi; }
  /// Edge-array blocks of size cfg.block_size.
  std::uint64_t block_count() const noexcept;

  std::uint64_t word(std::uint64_t pos) const noexcept {
    return std::atomic_ref<std::uint64_t>(words_[pos]).load(std::memory_order_relaxed);
  }

  /// Out-edges of v; one seek plus the covered blocks when v has any.
  void out_edges(InternalId v, TypeFilter filter, IoStats* stats,
                 std::vector<PartitionEdge>& out) const;
  /// In-edges of v by chain walk. Throws CorruptionError on a broken chain.
  void in_edges(InternalId v, TypeFilter filter, IoStats* stats,
                std::vector<PartitionEdge>& out) const;
  /// Edge at pos, including tombstoned ones.
  EdgeTuple edge_at(std::uint64_t pos, IoStats* stats) const;
  /// Position range [first, next) of v's out-edges, if any.
  std::optional<IndexRange> out_range(InternalId v, IoStats* stats) const;

  /// Atomically rewrites the 4-bit type. Returns the previous type.
  std::uint8_t set_type(std::uint64_t pos, std::uint8_t type, bool sync);

  /// (src, first pos) of every source vertex, decoded once and cached.
  const std::vector<IndexEntry>& sources() const;

  /// Live edges with their attribute rows under `schema`.
  EdgeRun load_run(const Schema& schema, bool skip_tombstones, IoStats* stats) const;

  /// Visits every edge accepted by `filter` in position order.
  template <typename Fn>
  void scan(TypeFilter filter, IoStats* stats, Fn&& fn) const {
    charge_sequential(0, count_, stats);
    const auto& src = sources();
    for (std::size_t k = 0; k < src.size(); ++k) {
      const std::uint64_t end = k + 1 < src.size() ? src[k + 1].pos : count_;
      for (std::uint64_t p = src[k].pos; p < end; ++p) {
        const std::uint64_t w = word(p);
        if (filter.accepts(entry::type(w))) fn(p, EdgeTuple{src[k].key, entry::dst(w), entry::type(w)});
      }
    }
  }

  /// Base of the cells of edge column `col`, or nullptr if the partition has
  /// no file for it yet and !create. Created files hold the null value.
  std::byte* column_cells(const ColumnSchema& col, bool create) const;
  void read_cell(const ColumnSchema& col, std::uint64_t pos, void* out, IoStats* stats) const;
  void write_cell(const ColumnSchema& col, std::uint64_t pos, const void* value, bool sync,
                  IoStats* stats);
  void sync_column(const ColumnSchema& col) const;

  /// Charges a sequential read of positions [first, last) of the edge array.
  void charge_sequential(std::uint64_t first, std::uint64_t last, IoStats* stats) const;

  std::uint64_t edges_file_bytes() const noexcept { return kFileHeaderSize + count_ * 8; }
  const PairIndex& out_index() const noexcept { return *out_index_; }
  const PairIndex& in_index() const noexcept { return *in_index_; }

  /// The directory is removed once the last reference is dropped.
  void mark_obsolete() noexcept { obsolete_.store(true); }

 private:
  EdgePartition() = default;
  static std::shared_ptr<EdgePartition> open_dir(const fs::path& dir, const PartitionInfo& info,
                                                 const DbConfig& cfg);

  PartitionInfo info_;
  fs::path dir_;
  std::uint32_t block_size_ = 4096;
  std::uint64_t count_ = 0;
  MappedFile edges_;
  std::uint64_t* words_ = nullptr;
  std::unique_ptr<PairIndex> out_index_;
  std::unique_ptr<PairIndex> in_index_;
  mutable std::once_flag sources_once_;
  mutable std::vector<IndexEntry> sources_;
  mutable std::mutex columns_mu_;
  mutable std::map<std::string, std::unique_ptr<MappedFile>> columns_;
  std::atomic<bool> obsolete_{false};
};

}  // namespace palgraph
