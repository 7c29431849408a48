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
#include <compare>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace palgraph {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class Errc {
  invalid_argument,
  out_of_range,
  corruption,
  stale_handle,
  io,
  capacity,
  schema,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// On-disk structure failed validation (bad magic, broken in-edge chain,
/// checksum mismatch).
class CorruptionError : public Error {
 public:
  explicit CorruptionError(const std::string& what)
      : Error(Errc::corruption, what) {}
};

/// A handle refers to a partition or buffer that has since been replaced.
/// Callers re-run the query that produced the handle and retry.
class StaleHandleError : public Error {
 public:
  explicit StaleHandleError(const std::string& what)
      : Error(Errc::stale_handle, what) {}
};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Vertex ID as seen by applications. Storage never sees these.
enum class OriginalId : std::uint64_t {};

/// Storage-side vertex ID, the image of an OriginalId under the interval hash.
using InternalId = std::uint64_t;

constexpr std::uint64_t raw(OriginalId id) noexcept {
  return static_cast<std::uint64_t>(id);
}

inline constexpr unsigned kVertexIdBits = 36;
inline constexpr std::uint64_t kMaxVertexIdSpace = std::uint64_t{1} << kVertexIdBits;
inline constexpr unsigned kTypeBits = 4;
inline constexpr std::uint8_t kTombstoneType = 15;
/// User edge types are [0, kTombstoneType); 15 marks deleted edges.
inline constexpr std::uint8_t kMaxUserType = kTombstoneType - 1;
inline constexpr unsigned kChainBits = 24;
inline constexpr std::uint64_t kChainStop = (std::uint64_t{1} << kChainBits) - 1;
/// Hard cap on edges per partition; keeps chain deltas below the stop word.
inline constexpr std::uint64_t kMaxPartitionEdges = kChainStop;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class IndexKind : std::uint8_t {
  gamma,   ///< Elias-Gamma coded out-start index, pinned in memory
  sparse,  ///< raw on-disk out-start index with an in-memory sparse index
  binary,  ///< raw on-disk out-start index, plain binary search
};

const char* index_kind_name(IndexKind kind) noexcept;
IndexKind parse_index_kind(std::string_view text);

/// Structural parameters. Persisted at the DB root and fixed at creation.
struct DbConfig {
  std::uint64_t max_id = 0;
  std::uint32_t partitions = 1;
  std::uint32_t branching = 4;
  /// false selects the flat layout: P buffered leaves, no upper levels.
  bool lsm = true;
  std::uint64_t buffer_capacity = 1'000'000;
  std::uint64_t max_partition_edges = std::uint64_t{1} << 22;
  bool durable_buffers = false;
  std::uint32_t block_size = 4096;
  IndexKind out_index = IndexKind::gamma;
  std::uint32_t sparse_stride = 128;
  std::uint32_t layout_version = 1;

  std::uint64_t interval_length() const noexcept {
    return max_id / partitions + 1;
  }
  std::uint64_t id_space() const noexcept {
    return interval_length() * partitions;
  }

  /// Throws Error(invalid_argument) when an invariant does not hold.
  void validate() const;

  void save(const std::filesystem::path& file) const;
  static DbConfig load(const std::filesystem::path& file);
};

enum class FlushMode : std::uint8_t { synchronous, background };

/// Per-process knobs. Not persisted.
struct RuntimeOptions {
  FlushMode flush_mode = FlushMode::synchronous;
  /// fsync partition files and directories when a partition is published.
  bool sync_partitions = true;
  /// Partition probes per query run on up to this many threads.
  unsigned query_threads = 1;
  /// traverse_out switches to the bottom-up sweep when
  /// |frontier| > bottom_up_ratio * |V|.
  double bottom_up_ratio = 1.0 / 20.0;
  /// PSW refuses owner partitions larger than this.
  std::uint64_t psw_memory_edges = std::uint64_t{1} << 24;
  unsigned compute_threads = 1;
};

// ---------------------------------------------------------------------------
// Interval arithmetic and the reversible ID hash
// ---------------------------------------------------------------------------

struct VertexInterval {
  std::uint32_t index = 0;
  InternalId lo = 0;
  InternalId hi = 0;  ///< inclusive

  std::uint64_t offset_of(InternalId v) const noexcept { return v - lo; }
  bool contains(InternalId v) const noexcept { return v >= lo && v <= hi; }
  friend bool operator==(const VertexInterval&, const VertexInterval&) = default;
};

/// Precomputed P / L pair. All conversions are pure and thread-safe.
class IdSpace {
 public:
  IdSpace() = default;
  explicit IdSpace(const DbConfig& cfg)
      : max_id_(cfg.max_id),
        partitions_(cfg.partitions),
        length_(cfg.interval_length()) {}

  std::uint64_t max_id() const noexcept { return max_id_; }
  std::uint32_t partitions() const noexcept { return partitions_; }
  std::uint64_t interval_length() const noexcept { return length_; }
  std::uint64_t size() const noexcept { return length_ * partitions_; }

  InternalId to_internal(OriginalId orig) const;
  OriginalId to_original(InternalId intern) const;
  VertexInterval interval_of(InternalId v) const;
  VertexInterval interval(std::uint32_t index) const;

  /// True if the internal ID is the image of some original ID <= max_id.
  bool is_vertex(InternalId v) const noexcept {
    return v < size() && (v % length_) * partitions_ + (v / length_) <= max_id_;
  }

 private:
  std::uint64_t max_id_ = 0;
  std::uint32_t partitions_ = 1;
  std::uint64_t length_ = 1;
};

InternalId to_internal(OriginalId orig, const DbConfig& cfg);
OriginalId to_original(InternalId intern, const DbConfig& cfg);
VertexInterval interval_of(InternalId v, const DbConfig& cfg);

// ---------------------------------------------------------------------------
// Edges
// ---------------------------------------------------------------------------

struct EdgeTuple {
  InternalId src = 0;
  InternalId dst = 0;
  std::uint8_t type = 0;

  friend auto operator<=>(const EdgeTuple&, const EdgeTuple&) = default;
};

/// Locates one physical edge. Level 0 addresses the in-memory edge buffers;
/// levels 1..L_G address tree partitions, 1 being the top.
struct EdgeHandle {
  static constexpr std::uint32_t kBufferLevel = 0;

  std::uint32_t level = 0;
  std::uint32_t index = 0;   ///< partition within the level (top partition for buffers)
  std::uint32_t sub = 0;     ///< buffer sub-part, unused for partitions
  std::uint64_t offset = 0;  ///< edge-array position or buffer slot
  /// Partition uid, or buffer epoch. Mismatch means the handle is stale.
  std::uint64_t generation = 0;

  bool buffered() const noexcept { return level == kBufferLevel; }
  friend bool operator==(const EdgeHandle&, const EdgeHandle&) = default;
};

/// Accepted edge types as a bitmask. The tombstone type never passes.
class TypeFilter {
 public:
  constexpr TypeFilter() = default;
  static constexpr TypeFilter any() { return TypeFilter{}; }
  static constexpr TypeFilter only(std::uint8_t type) {
    TypeFilter f;
    f.mask_ = static_cast<std::uint16_t>(1u << (type & 15u)) & kUserMask;
    return f;
  }
  static constexpr TypeFilter none() {
    TypeFilter f;
    f.mask_ = 0;
    return f;
  }
  constexpr TypeFilter& allow(std::uint8_t type) {
    mask_ |= static_cast<std::uint16_t>(1u << (type & 15u)) & kUserMask;
    return *this;
  }
  constexpr bool accepts(std::uint8_t type) const noexcept {
    return (mask_ >> (type & 15u)) & 1u;
  }
  constexpr std::uint16_t mask() const noexcept { return mask_; }

 private:
  static constexpr std::uint16_t kUserMask = 0x7fff;
  std::uint16_t mask_ = kUserMask;
};

// ---------------------------------------------------------------------------
// I/O accounting
// ---------------------------------------------------------------------------

/// Plain copy of the counters.
struct IoCounters {
  std::uint64_t random_seeks = 0;
  std::uint64_t sequential_blocks = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t edges_written = 0;
  std::uint64_t partitions_probed = 0;

  IoCounters& operator+=(const IoCounters& o) noexcept;
  friend IoCounters operator-(IoCounters a, const IoCounters& b) noexcept;
};

/// Block-transfer counters in the external-memory model. The counters are
/// charged by storage code, never measured from the OS, so they are exact
/// and reproducible. Monotone within a scope.
class IoStats {
 public:
  void seek(std::uint64_t n = 1) noexcept { add(random_seeks_, n); }
  void blocks(std::uint64_t n) noexcept { add(sequential_blocks_, n); }
  void read(std::uint64_t bytes) noexcept { add(bytes_read_, bytes); }
  void wrote(std::uint64_t bytes) noexcept { add(bytes_written_, bytes); }
  void edges_written(std::uint64_t n) noexcept { add(edges_written_, n); }
  void probed(std::uint64_t n = 1) noexcept { add(partitions_probed_, n); }

  IoCounters counters() const noexcept;
  void merge(const IoCounters& c) noexcept;
  void reset() noexcept;

 private:
  static void add(std::atomic<std::uint64_t>& c, std::uint64_t n) noexcept {
    c.fetch_add(n, std::memory_order_relaxed);
  }
  std::atomic<std::uint64_t> random_seeks_{0};
  std::atomic<std::uint64_t> sequential_blocks_{0};
  std::atomic<std::uint64_t> bytes_read_{0};
  std::atomic<std::uint64_t> bytes_written_{0};
  std::atomic<std::uint64_t> edges_written_{0};
  std::atomic<std::uint64_t> partitions_probed_{0};
};

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) noexcept {
  return (a + b - 1) / b;
}

}  // namespace palgraph
