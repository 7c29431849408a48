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
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "palgraph/columns.hpp"
#include "palgraph/core.hpp"
#include "palgraph/edge_buffer.hpp"
#include "palgraph/partition.hpp"
#include "palgraph/wal.hpp"

namespace palgraph {

/// Level layout of the tree. Level 1 is the top, level depth() the leaves.
/// Each level above the leaves has ceil(count / f) partitions; the top has
/// one. Partition k of a level covers a contiguous range of leaf intervals.
class LsmShape {
 public:
  LsmShape() = default;
  explicit LsmShape(const DbConfig& cfg);

  std::uint32_t depth() const noexcept { return static_cast<std::uint32_t>(counts_.size()); }
  std::uint32_t count(std::uint32_t level) const { return counts_[level - 1]; }
  std::uint64_t total_partitions() const noexcept;
  /// Leaf interval range [first, last] of partition k at `level`.
  std::uint32_t first_leaf(std::uint32_t level, std::uint32_t k) const {
    return first_leaf_[level - 1][k];
  }
  std::uint32_t last_leaf(std::uint32_t level, std::uint32_t k) const {
    return first_leaf_[level - 1][k + 1] - 1;
  }
  /// The partition of `level` whose leaves include `leaf`.
  std::uint32_t owner(std::uint32_t level, std::uint32_t leaf) const {
    return leaf_owner_[level - 1][leaf];
  }
  /// Child index range [first, last] at level + 1.
  std::uint32_t first_child(std::uint32_t level, std::uint32_t k) const;
  std::uint32_t last_child(std::uint32_t level, std::uint32_t k) const;

 private:
  std::uint32_t branching_ = 4;
  std::vector<std::uint32_t> counts_;
  std::vector<std::vector<std::uint32_t>> first_leaf_;  // per level, count + 1 bounds
  std::vector<std::vector<std::uint32_t>> leaf_owner_;
};

/// Live partitions of one generation; nullptr marks an empty partition.
struct Snapshot {
  std::uint64_t generation = 0;
  std::vector<std::vector<std::shared_ptr<EdgePartition>>> levels;  // [level - 1][k]

  const std::shared_ptr<EdgePartition>& at(std::uint32_t level, std::uint32_t k) const {
    return levels[level - 1][k];
  }
};

/// An edge in internal IDs with the handle locating it.
struct EdgeRecord {
  EdgeTuple edge;
  EdgeHandle handle;
};

/// An edge in original IDs, as returned by the public query calls.
struct Edge {
  OriginalId src{};
  OriginalId dst{};
  std::uint8_t type = 0;
  EdgeHandle handle;
};

struct LevelStats {
  std::uint32_t level = 0;
  std::uint32_t slots = 0;
  std::uint32_t nonempty = 0;
  std::uint64_t edges = 0;
  std::uint64_t edge_bytes = 0;
  std::uint64_t out_index_file_bytes = 0;
  std::uint64_t out_index_memory_bytes = 0;
  std::uint64_t out_index_raw_bytes = 0;
  std::uint64_t in_index_bytes = 0;
};

struct DbStats {
  std::uint64_t generation = 0;
  std::vector<LevelStats> levels;
  std::uint64_t buffered_slots = 0;
  std::uint64_t buffered_live = 0;
  std::uint64_t buffer_capacity = 0;
  std::uint64_t flushes = 0;
  std::uint64_t downstream_merges = 0;
  std::uint64_t wal_syncs = 0;
  std::uint64_t payload_bytes = 0;
  IoCounters io;

  std::uint64_t stored_edges() const noexcept;
};

class Database;

/// Consistent read access: one generation plus the buffers as of one
/// instant. Holds a shared lock, so writers wait while a view is alive; a
/// thread must not write while it holds a view.
class ReadView {
 public:
  ReadView(const Database& db);

  const Snapshot& snapshot() const noexcept { return *snap_; }
  const Schema& schema() const noexcept { return *schema_; }
  const Database& db() const noexcept { return *db_; }

  /// Buffers first, then level, partition and position order.
  void out_edges(InternalId u, TypeFilter filter, IoStats* stats,
                 std::vector<EdgeRecord>& out) const;
  void in_edges(InternalId u, TypeFilter filter, IoStats* stats,
                std::vector<EdgeRecord>& out) const;

  /// Buffer hits only, in slot order.
  void buffered_out_edges(InternalId u, TypeFilter filter, std::vector<EdgeRecord>& out) const;
  void buffered_in_edges(InternalId u, TypeFilter filter, std::vector<EdgeRecord>& out) const;

  /// Visits every live buffered edge accepted by `filter`.
  template <typename Fn>
  void scan_buffers(TypeFilter filter, Fn&& fn) const;

  bool valid(const EdgeHandle& h) const;
  void read_edge_cell(const ColumnSchema& col, const EdgeHandle& h, void* out,
                      IoStats* stats) const;

 private:
  const Database* db_;
  std::shared_lock<std::shared_mutex> lock_;
  std::shared_ptr<const Snapshot> snap_;
  std::shared_ptr<const Schema> schema_;
};

/// Embedded graph store. Every write goes through one writer gate; reads
/// run concurrently against an atomically published Snapshot.
class Database {
 public:
  static std::unique_ptr<Database> create(const fs::path& root, const DbConfig& cfg,
                                          const RuntimeOptions& opts = {});
  static std::unique_ptr<Database> open(const fs::path& root, const RuntimeOptions& opts = {});
  static bool exists(const fs::path& root);

  ~Database();
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  /// Flushes buffers and stops background work. Further calls are no-ops.
  void close();

  const fs::path& root() const noexcept { return root_; }
  const DbConfig& config() const noexcept { return cfg_; }
  const IdSpace& ids() const noexcept { return ids_; }
  const LsmShape& shape() const noexcept { return shape_; }
  const RuntimeOptions& options() const noexcept { return opts_; }
  std::shared_ptr<const Schema> schema() const;
  ReadView read_view() const { return ReadView(*this); }

  void add_column(const ColumnSchema& column);
  /// Adds the column unless one with the same name, kind and target exists.
  void ensure_column(const ColumnSchema& column);
  AttributeRow new_row() const { return AttributeRow(schema()); }

  // --- writes (original IDs) ----------------------------------------------
  void insert_edge(OriginalId src, OriginalId dst, std::uint8_t type,
                   const AttributeRow* attrs = nullptr);
  /// Removes every live copy of (src, dst, type). Returns whether any existed.
  bool delete_edge(OriginalId src, OriginalId dst, std::uint8_t type);
  /// Rewrites the assigned cells of existing copies in place, or inserts.
  /// Returns true if an existing edge was updated.
  bool insert_or_update_edge(OriginalId src, OriginalId dst, std::uint8_t type,
                             const AttributeRow& attrs);
  void set_edge_type(const EdgeHandle& h, std::uint8_t type);

  template <typename T>
  void set_edge_value(std::string_view column, const EdgeHandle& h, T value) {
    auto s = schema();
    const auto idx = s->edge_index(column);
    if (!idx) throw Error(Errc::schema, "no edge column named '" + std::string(column) + "'");
    check_column_type<T>(s->edge_column(*idx));
    write_edge_cell(*idx, h, &value);
  }
  template <typename T>
  T get_edge_value(std::string_view column, const EdgeHandle& h) const {
    ReadView view(*this);
    const ColumnSchema& col = view.schema().edge_column(column);
    check_column_type<T>(col);
    T value;
    view.read_edge_cell(col, h, &value, nullptr);
    return value;
  }

  template <typename T>
  void set_vertex_value(std::string_view column, OriginalId v, T value) {
    const ColumnSchema col = vertex_column(column);
    check_column_type<T>(col);
    write_vertex_cell(col, ids_.to_internal(v), &value);
  }
  template <typename T>
  T get_vertex_value(std::string_view column, OriginalId v) const {
    const ColumnSchema col = vertex_column(column);
    check_column_type<T>(col);
    T value;
    read_vertex_cell(col, ids_.to_internal(v), &value);
    return value;
  }

  PayloadRef append_payload(std::string_view bytes);
  std::string read_payload(PayloadRef ref) const;

  /// Flushes every buffer.
  void flush();
  /// Flushes the top partition holding the largest buffer. False if empty.
  bool flush_largest();

  // --- reads (original IDs) -----------------------------------------------
  std::vector<Edge> out_edges(OriginalId u, TypeFilter filter = TypeFilter::any(),
                              IoStats* stats = nullptr) const;
  std::vector<Edge> in_edges(OriginalId u, TypeFilter filter = TypeFilter::any(),
                             IoStats* stats = nullptr) const;
  Edge to_original(const EdgeRecord& r) const;

  /// Cumulative counters for all work done through this handle.
  IoStats& io() const noexcept { return io_; }
  DbStats stats() const;
  std::uint64_t buffered_edges() const;

  // --- internal access for whole-graph programs -----------------------------
  /// Holds the writer gate for its lifetime after flushing every buffer.
  class ExclusiveSession {
   public:
    explicit ExclusiveSession(Database& db);
    Database& db() noexcept { return db_; }
    ReadView view() const { return ReadView(db_); }
    void ensure_column(const ColumnSchema& column);
    VertexColumnStore& vertex_store() noexcept { return *db_.vcols_; }
    bool durable() const noexcept { return db_.cfg_.durable_buffers; }

   private:
    Database& db_;
    std::unique_lock<std::mutex> gate_;
  };

 private:
  friend class ReadView;
  friend class ExclusiveSession;
  struct Change {
    std::uint32_t level;
    std::uint32_t index;
    std::shared_ptr<EdgePartition> part;
  };
  struct Manifest {
    std::uint64_t generation = 0;
    std::uint32_t wal_generation = 0;
    std::uint64_t next_uid = 1;
    std::vector<PartitionInfo> parts;
  };

  Database(fs::path root, DbConfig cfg, RuntimeOptions opts);

  void recover();
  void open_side_stores();
  void replay(const std::vector<std::vector<std::byte>>& records);
  void apply_record(std::span<const std::byte> rec);
  void write_manifest(const Snapshot& snap, std::uint32_t wal_generation);
  static Manifest read_manifest(const fs::path& root);
  void remove_orphans(const Snapshot& snap);
  PartitionInfo info_for(std::uint32_t level, std::uint32_t k, std::uint64_t uid) const;

  ColumnSchema vertex_column(std::string_view name) const;
  void write_edge_cell(std::size_t col_index, const EdgeHandle& h, const void* value);
  void write_vertex_cell(const ColumnSchema& col, InternalId v, const void* value);
  void read_vertex_cell(const ColumnSchema& col, InternalId v, void* out) const;

  // Gate held by the caller for everything below.
  void add_column_locked(const ColumnSchema& column);
  std::uint64_t log(std::span<const std::byte> rec);
  void after_write(std::unique_lock<std::mutex>& gate, std::uint64_t lsn);
  void insert_locked(const EdgeTuple& e, std::span<const std::byte> row, bool logged);
  void flush_all_locked();
  bool flush_largest_locked();
  void flush_top(std::uint32_t t);
  void place(std::uint32_t level, std::uint32_t k, EdgeRun run, const Snapshot& snap,
             std::vector<Change>& changes);
  std::vector<std::vector<std::byte>> buffer_records(std::uint32_t skip_top) const;
  void publish(std::vector<Change> changes, std::uint32_t flushed_top);
  std::uint32_t top_of(InternalId dst) const { return shape_.owner(1, ids_.interval_of(dst).index); }
  SubBuffer& sub(std::uint32_t t, std::uint32_t s) { return buffers_[t][s]; }
  const SubBuffer& sub(std::uint32_t t, std::uint32_t s) const { return buffers_[t][s]; }
  void check_handle(const Snapshot& snap, const EdgeHandle& h) const;

  void start_background();
  void background_loop();

  fs::path root_;
  DbConfig cfg_;
  IdSpace ids_;
  LsmShape shape_;
  RuntimeOptions opts_;
  bool sync_parts_ = true;

  mutable std::mutex gate_;
  mutable std::shared_mutex state_mu_;
  std::shared_ptr<const Snapshot> snap_;
  std::shared_ptr<const Schema> schema_;
  std::vector<std::vector<SubBuffer>> buffers_;  // [top partition][source interval]
  std::uint64_t buffered_slots_ = 0;
  std::uint64_t buffered_live_ = 0;
  std::uint64_t epoch_ = 0;

  std::uint64_t next_uid_ = 1;
  std::uint32_t wal_generation_ = 0;
  std::unique_ptr<Wal> wal_;
  std::unique_ptr<PayloadLog> payload_;
  std::unique_ptr<VertexColumnStore> vcols_;
  mutable IoStats io_;
  std::atomic<std::uint64_t> flushes_{0};
  std::atomic<std::uint64_t> merges_{0};

  std::thread background_;
  std::condition_variable_any background_cv_;
  bool stop_ = false;
  bool closed_ = false;
};

template <typename Fn>
void ReadView::scan_buffers(TypeFilter filter, Fn&& fn) const {
  const auto& bufs = db_->buffers_;
  for (std::uint32_t t = 0; t < bufs.size(); ++t) {
    for (std::uint32_t s = 0; s < bufs[t].size(); ++s) {
      const SubBuffer& b = bufs[t][s];
      for (std::uint32_t slot = 0; slot < b.slots(); ++slot) {
        if (!b.live(slot) || !filter.accepts(b.edge(slot).type)) continue;
        fn(EdgeRecord{b.edge(slot), EdgeHandle{EdgeHandle::kBufferLevel, t, s, slot, b.epoch()}});
      }
    }
  }
}

}  // namespace palgraph
