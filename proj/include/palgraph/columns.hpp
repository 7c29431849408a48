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
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palgraph/core.hpp"
#include "palgraph/file_util.hpp"

namespace palgraph {

enum class ColumnKind : std::uint8_t { int8, int32, int64, float32, float64, timestamp, varlen_ref };
enum class ColumnTarget : std::uint8_t { edge, vertex };

std::size_t column_width(ColumnKind kind) noexcept;
const char* column_kind_name(ColumnKind kind) noexcept;
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::int64;
  ColumnTarget target = ColumnTarget::edge;

  std::size_t width() const noexcept { return column_width(kind); }
};

/// Position of a record in the payload log. The all-ones value is null.
struct PayloadRef {
  static constexpr std::uint64_t kNull = UINT64_MAX;
  std::uint64_t position = kNull;

  bool is_null() const noexcept { return position == kNull; }
  friend bool operator==(const PayloadRef&, const PayloadRef&) = default;
};

/// Millisecond timestamps share the int64 representation.
template <typename T>
struct ColumnType;
template <>
struct ColumnType<std::int8_t> {
  static bool accepts(ColumnKind k) { return k == ColumnKind::int8; }
};
template <>
struct ColumnType<std::int32_t> {
  static bool accepts(ColumnKind k) { return k == ColumnKind::int32; }
};
template <>
struct ColumnType<std::int64_t> {
  static bool accepts(ColumnKind k) {
    return k == ColumnKind::int64 || k == ColumnKind::timestamp;
  }
};
template <>
struct ColumnType<float> {
  static bool accepts(ColumnKind k) { return k == ColumnKind::float32; }
};
template <>
struct ColumnType<double> {
  static bool accepts(ColumnKind k) { return k == ColumnKind::float64; }
};
template <>
struct ColumnType<PayloadRef> {
  static bool accepts(ColumnKind k) { return k == ColumnKind::varlen_ref; }
};

template <typename T>
void check_column_type(const ColumnSchema& col) {
  if (!ColumnType<T>::accepts(col.kind))
    throw Error(Errc::schema, "column '" + col.name + "' holds " +
                                  column_kind_name(col.kind) + " values");
}

/// Writes the null pattern of `kind`: zero for numbers, all ones for refs.
void write_null(ColumnKind kind, std::byte* out) noexcept;

/// Word-atomic cell access on aligned storage (widths 1, 4 and 8).
void load_cell(const std::byte* cell, std::size_t width, void* out) noexcept;
void store_cell(std::byte* cell, std::size_t width, const void* value) noexcept;

/// Column declarations. Edge columns are laid out in declaration order in
/// attribute rows; new columns only ever append, so an older row is a prefix
/// of a newer one.
class Schema {
 public:
  const std::vector<ColumnSchema>& columns() const noexcept { return columns_; }

  std::size_t edge_column_count() const noexcept { return edge_columns_.size(); }
  const ColumnSchema& edge_column(std::size_t i) const { return columns_[edge_columns_[i]]; }
  std::size_t edge_offset(std::size_t i) const { return edge_offsets_[i]; }
  std::size_t row_width() const noexcept { return row_width_; }
  std::optional<std::size_t> edge_index(std::string_view name) const;
  const ColumnSchema& edge_column(std::string_view name) const;

  std::optional<ColumnSchema> vertex_column(std::string_view name) const;

  void add(ColumnSchema column);
  bool contains(std::string_view name, ColumnTarget target) const;

  std::vector<std::byte> null_row() const;
  /// Extends a row written under an older schema with nulls.
  void pad_row(std::vector<std::byte>& row) const;

  void save(const fs::path& file, bool sync) const;
  static Schema load(const fs::path& file);

 private:
  std::vector<ColumnSchema> columns_;
  std::vector<std::size_t> edge_columns_;
  std::vector<std::size_t> edge_offsets_;
  std::size_t row_width_ = 0;
};

/// Edge attribute values for one insert, in row form.
class AttributeRow {
 public:
  explicit AttributeRow(std::shared_ptr<const Schema> schema);

  template <typename T>
  AttributeRow& set(std::string_view column, T value) {
    const std::size_t i = index_of(column);
    check_column_type<T>(schema_->edge_column(i));
    std::memcpy(bytes_.data() + schema_->edge_offset(i), &value, sizeof(T));
    set_mask_ |= std::uint64_t{1} << i;
    return *this;
  }

  template <typename T>
  T get(std::string_view column) const {
    const std::size_t i = index_of(column);
    check_column_type<T>(schema_->edge_column(i));
    T value;
    std::memcpy(&value, bytes_.data() + schema_->edge_offset(i), sizeof(T));
    return value;
  }

  std::span<const std::byte> bytes() const noexcept { return bytes_; }
  /// Bit i set when edge column i was assigned explicitly.
  std::uint64_t set_mask() const noexcept { return set_mask_; }
  const Schema& schema() const noexcept { return *schema_; }

 private:
  std::size_t index_of(std::string_view column) const;

  std::shared_ptr<const Schema> schema_;
  std::vector<std::byte> bytes_;
  std::uint64_t set_mask_ = 0;
};

/// Append-only log of length-prefixed byte strings:
///   header | { u32 length | u32 crc32 | bytes }*
/// A PayloadRef is the byte offset of a record. On open, a torn tail record
/// is truncated away.
class PayloadLog {
 public:
  static std::unique_ptr<PayloadLog> open(const fs::path& path, bool durable);

  PayloadRef append(std::span<const std::byte> bytes);
  PayloadRef append(std::string_view text) {
    return append(std::as_bytes(std::span(text.data(), text.size())));
  }
  std::string read(PayloadRef ref) const;
  std::uint64_t end() const;

 private:
  File file_;
  bool durable_ = false;
  mutable std::mutex append_mu_;
  std::atomic<std::uint64_t> end_{0};
};

/// Dense per-interval vertex columns under `vcols/<name>/i<interval>.bin`.
/// The value of vertex v lives at slot v - interval.lo. Interval files are
/// created on first write, filled with the column's null value.
class VertexColumnStore {
 public:
  VertexColumnStore(fs::path root, IdSpace ids, bool durable);

  void read(const ColumnSchema& col, InternalId v, void* out, IoStats* stats) const;
  void write(const ColumnSchema& col, InternalId v, const void* value, IoStats* stats);

  /// Base of interval `index`'s cells, creating the file when `create`.
  /// Returns nullptr for an absent file when !create.
  std::byte* interval_cells(const ColumnSchema& col, std::uint32_t index, bool create);
  void sync_column(const ColumnSchema& col);

 private:
  struct Key {
    std::string name;
    std::uint32_t interval;
    auto operator<=>(const Key&) const = default;
  };
  MappedFile* find(const ColumnSchema& col, std::uint32_t interval) const;
  MappedFile* create(const ColumnSchema& col, std::uint32_t interval);
  fs::path file_for(const ColumnSchema& col, std::uint32_t interval) const;

  fs::path root_;
  IdSpace ids_;
  bool durable_;
  mutable std::shared_mutex mu_;
  mutable std::map<Key, std::unique_ptr<MappedFile>> files_;
};

}  // namespace palgraph
