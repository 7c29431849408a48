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

#include "palgraph/columns.hpp"

#include <fcntl.h>
#include <zlib.h>

#include <fstream>
#include <sstream>

namespace palgraph {

std::size_t column_width(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::int8: return 1;
    case ColumnKind::int32: return 4;
    case ColumnKind::float32: return 4;
    case ColumnKind::int64:
    case ColumnKind::float64:
    case ColumnKind::timestamp:
    case ColumnKind::varlen_ref: return 8;
  }
  return 8;
}

const char* column_kind_name(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::int8: return "int8";
    case ColumnKind::int32: return "int32";
    case ColumnKind::int64: return "int64";
    case ColumnKind::float32: return "float32";
    case ColumnKind::float64: return "float64";
    case ColumnKind::timestamp: return "timestamp";
    case ColumnKind::varlen_ref: return "varlen";
  }
  return "int64";
}

ColumnKind parse_column_kind(std::string_view text) {
  for (auto k : {ColumnKind::int8, ColumnKind::int32, ColumnKind::int64, ColumnKind::float32,
                 ColumnKind::float64, ColumnKind::timestamp, ColumnKind::varlen_ref}) {
    if (text == column_kind_name(k)) return k;
  }
  throw Error(Errc::invalid_argument, "unknown column kind '" + std::string(text) + "'");
}

void write_null(ColumnKind kind, std::byte* out) noexcept {
  const std::size_t w = column_width(kind);
  std::memset(out, kind == ColumnKind::varlen_ref ? 0xff : 0, w);
}

void load_cell(const std::byte* cell, std::size_t width, void* out) noexcept {
  auto* p = const_cast<std::byte*>(cell);
  switch (width) {
    case 1: {
      auto v = std::atomic_ref<std::uint8_t>(*reinterpret_cast<std::uint8_t*>(p))
                   .load(std::memory_order_relaxed);
      std::memcpy(out, &v, 1);
      break;
    }
    case 4: {
      auto v = std::atomic_ref<std::uint32_t>(*reinterpret_cast<std::uint32_t*>(p))
                   .load(std::memory_order_relaxed);
      std::memcpy(out, &v, 4);
      break;
    }
    default: {
      auto v = std::atomic_ref<std::uint64_t>(*reinterpret_cast<std::uint64_t*>(p))
                   .load(std::memory_order_relaxed);
      std::memcpy(out, &v, 8);
      break;
    }
  }
}

void store_cell(std::byte* cell, std::size_t width, const void* value) noexcept {
  switch (width) {
    case 1: {
      std::uint8_t v;
      std::memcpy(&v, value, 1);
      std::atomic_ref<std::uint8_t>(*reinterpret_cast<std::uint8_t*>(cell))
          .store(v, std::memory_order_relaxed);
      break;
    }
    case 4: {
      std::uint32_t v;
      std::memcpy(&v, value, 4);
      std::atomic_ref<std::uint32_t>(*reinterpret_cast<std::uint32_t*>(cell))
          .store(v, std::memory_order_relaxed);
      break;
    }
    default: {
      std::uint64_t v;
      std::memcpy(&v, value, 8);
      std::atomic_ref<std::uint64_t>(*reinterpret_cast<std::uint64_t*>(cell))
          .store(v, std::memory_order_relaxed);
      break;
    }
  }
}

// --- Schema -----------------------------------------------------------------

std::optional<std::size_t> Schema::edge_index(std::string_view name) const {
  for (std::size_t i = 0; i < edge_columns_.size(); ++i)
    if (columns_[edge_columns_[i]].name == name) return i;
  return std::nullopt;
}

const ColumnSchema& Schema::edge_column(std::string_view name) const {
  auto i = edge_index(name);
  if (!i) throw Error(Errc::schema, "no edge column named '" + std::string(name) + "'");
  return edge_column(*i);
}

std::optional<ColumnSchema> Schema::vertex_column(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.target == ColumnTarget::vertex && c.name == name) return c;
  return std::nullopt;
}

bool Schema::contains(std::string_view name, ColumnTarget target) const {
  for (const auto& c : columns_)
    if (c.target == target && c.name == name) return true;
  return false;
}

void Schema::add(ColumnSchema column) {
  if (column.name.empty() || column.name.find_first_of(" \t\n/\\") != std::string::npos)
    throw Error(Errc::invalid_argument, "bad column name '" + column.name + "'");
  if (contains(column.name, column.target))
    throw Error(Errc::schema, "column '" + column.name + "' already exists");
  if (column.target == ColumnTarget::edge) {
    if (edge_columns_.size() >= 64) throw Error(Errc::capacity, "at most 64 edge columns");
    // Align each cell to its width inside the row.
    const std::size_t w = column.width();
    row_width_ = (row_width_ + w - 1) / w * w;
    edge_offsets_.push_back(row_width_);
    row_width_ += w;
    edge_columns_.push_back(columns_.size());
  }
  columns_.push_back(std::move(column));
}

std::vector<std::byte> Schema::null_row() const {
  std::vector<std::byte> row(row_width_);
  for (std::size_t i = 0; i < edge_columns_.size(); ++i)
    write_null(edge_column(i).kind, row.data() + edge_offsets_[i]);
  return row;
}

void Schema::pad_row(std::vector<std::byte>& row) const {
  if (row.size() >= row_width_) return;
  const std::size_t old = row.size();
  row.resize(row_width_);
  for (std::size_t i = 0; i < edge_columns_.size(); ++i)
    if (edge_offsets_[i] >= old) write_null(edge_column(i).kind, row.data() + edge_offsets_[i]);
}

void Schema::save(const fs::path& file, bool sync) const {
  std::ostringstream out;
  for (const auto& c : columns_)
    out << (c.target == ColumnTarget::edge ? "edge" : "vertex") << ' ' << c.name << ' '
        << column_kind_name(c.kind) << '\n';
  write_file_atomic(file, out.str(), sync);
}

Schema Schema::load(const fs::path& file) {
  Schema s;
  std::ifstream in(file);
  if (!in) return s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string target, name, kind;
    if (!(ls >> target >> name >> kind) || (target != "edge" && target != "vertex"))
      throw CorruptionError("schema: malformed line '" + line + "'");
    s.add({name, parse_column_kind(kind),
           target == "edge" ? ColumnTarget::edge : ColumnTarget::vertex});
  }
  return s;
}

// --- AttributeRow -----------------------------------------------------------

AttributeRow::AttributeRow(std::shared_ptr<const Schema> schema)
    : schema_(std::move(schema)), bytes_(schema_->null_row()) {}

std::size_t AttributeRow::index_of(std::string_view column) const {
  auto i = schema_->edge_index(column);
  if (!i) throw Error(Errc::schema, "no edge column named '" + std::string(column) + "'");
  return *i;
}

// --- PayloadLog -------------------------------------------------------------

namespace {

std::uint32_t record_crc(std::uint32_t len, const void* data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(&len), sizeof(len));
  crc = crc32(crc, static_cast<const Bytef*>(data), len);
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::unique_ptr<PayloadLog> PayloadLog::open(const fs::path& path, bool durable) {
  auto log = std::make_unique<PayloadLog>();
  log->durable_ = durable;
  const bool fresh = !fs::exists(path);
  log->file_ = File(path, O_RDWR | O_CREAT);
  if (fresh || log->file_.size() < kFileHeaderSize) {
    auto h = make_header(kPayloadMagic);
    log->file_.truncate(0);
    log->file_.pwrite_all(h.data(), h.size(), 0);
    if (durable) log->file_.sync_data();
    log->end_ = kFileHeaderSize;
    return log;
  }
  std::array<std::byte, kFileHeaderSize> h{};
  log->file_.pread_exact(h.data(), h.size(), 0);
  check_header(h, kPayloadMagic, path.string());
  // Scan records; stop at the first torn or damaged one.
  const std::uint64_t size = log->file_.size();
  std::uint64_t pos = kFileHeaderSize;
  std::vector<char> buf;
  while (pos + 8 <= size) {
    std::uint32_t hdr[2];
    log->file_.pread_exact(hdr, sizeof(hdr), pos);
    if (pos + 8 + hdr[0] > size) break;
    buf.resize(hdr[0]);
    if (hdr[0] > 0) log->file_.pread_exact(buf.data(), hdr[0], pos + 8);
    if (record_crc(hdr[0], buf.data()) != hdr[1]) break;
    pos += 8 + hdr[0];
  }
  if (pos != size) log->file_.truncate(pos);
  log->end_ = pos;
  return log;
}

PayloadRef PayloadLog::append(std::span<const std::byte> bytes) {
  if (bytes.size() > UINT32_MAX) throw Error(Errc::capacity, "payload too large");
  std::vector<std::byte> rec(8 + bytes.size());
  const auto len = static_cast<std::uint32_t>(bytes.size());
  const std::uint32_t crc = record_crc(len, bytes.data());
  std::memcpy(rec.data(), &len, 4);
  std::memcpy(rec.data() + 4, &crc, 4);
  if (!bytes.empty()) std::memcpy(rec.data() + 8, bytes.data(), bytes.size());
  std::lock_guard lock(append_mu_);
  const std::uint64_t pos = end_.load(std::memory_order_relaxed);
  file_.pwrite_all(rec.data(), rec.size(), pos);
  if (durable_) file_.sync_data();
  end_.store(pos + rec.size(), std::memory_order_release);
  return PayloadRef{pos};
}

std::string PayloadLog::read(PayloadRef ref) const {
  const std::uint64_t end = end_.load(std::memory_order_acquire);
  if (ref.is_null()) throw Error(Errc::out_of_range, "payload: null reference");
  if (ref.position < kFileHeaderSize || ref.position + 8 > end)
    throw Error(Errc::out_of_range, "payload: position past end of log");
  std::uint32_t hdr[2];
  file_.pread_exact(hdr, sizeof(hdr), ref.position);
  if (ref.position + 8 + hdr[0] > end)
    throw Error(Errc::out_of_range, "payload: position does not address a record");
  std::string out(hdr[0], '\0');
  if (hdr[0] > 0) file_.pread_exact(out.data(), hdr[0], ref.position + 8);
  if (record_crc(hdr[0], out.data()) != hdr[1])
    throw Error(Errc::out_of_range, "payload: position does not address a record");
  return out;
}

std::uint64_t PayloadLog::end() const { return end_.load(std::memory_order_acquire); }

// --- VertexColumnStore ------------------------------------------------------

VertexColumnStore::VertexColumnStore(fs::path root, IdSpace ids, bool durable)
    : root_(std::move(root)), ids_(ids), durable_(durable) {
  if (!fs::exists(root_)) return;
  for (const auto& dir : fs::directory_iterator(root_)) {
    if (!dir.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(dir.path())) {
      const std::string stem = f.path().stem().string();
      if (f.path().extension() != ".bin" || stem.size() < 2 || stem[0] != 'i') continue;
      const auto interval = static_cast<std::uint32_t>(std::stoul(stem.substr(1)));
      auto m = std::make_unique<MappedFile>(MappedFile::open(f.path(), true));
      check_header(std::span(m->data(), m->size()), kVertexColumnMagic, f.path().string());
      files_[{dir.path().filename().string(), interval}] = std::move(m);
    }
  }
}

fs::path VertexColumnStore::file_for(const ColumnSchema& col, std::uint32_t interval) const {
  return root_ / col.name / ("i" + std::to_string(interval) + ".bin");
}

MappedFile* VertexColumnStore::find(const ColumnSchema& col, std::uint32_t interval) const {
  std::shared_lock lock(mu_);
  auto it = files_.find({col.name, interval});
  return it == files_.end() ? nullptr : it->second.get();
}

MappedFile* VertexColumnStore::create(const ColumnSchema& col, std::uint32_t interval) {
  std::unique_lock lock(mu_);
  auto it = files_.find({col.name, interval});
  if (it != files_.end()) return it->second.get();
  const fs::path path = file_for(col, interval);
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    FileWriter out(tmp);
    out.write(make_header(kVertexColumnMagic, static_cast<std::uint32_t>(col.width())));
    std::vector<std::byte> chunk(col.width() * 4096);
    for (std::size_t i = 0; i < 4096; ++i) write_null(col.kind, chunk.data() + i * col.width());
    std::uint64_t remaining = ids_.interval_length();
    while (remaining > 0) {
      const std::uint64_t n = std::min<std::uint64_t>(remaining, 4096);
      out.write(chunk.data(), n * col.width());
      remaining -= n;
    }
    out.finish(durable_);
  }
  fs::rename(tmp, path);
  auto m = std::make_unique<MappedFile>(MappedFile::open(path, true));
  MappedFile* raw_ptr = m.get();
  files_[{col.name, interval}] = std::move(m);
  return raw_ptr;
}

void VertexColumnStore::read(const ColumnSchema& col, InternalId v, void* out,
                             IoStats* stats) const {
  const VertexInterval iv = ids_.interval_of(v);
  if (stats != nullptr) {
    stats->seek();
    stats->blocks(1);
    stats->read(col.width());
  }
  MappedFile* m = find(col, iv.index);
  if (m == nullptr) {
    write_null(col.kind, static_cast<std::byte*>(out));
    return;
  }
  load_cell(m->data() + kFileHeaderSize + iv.offset_of(v) * col.width(), col.width(), out);
}

void VertexColumnStore::write(const ColumnSchema& col, InternalId v, const void* value,
                              IoStats* stats) {
  const VertexInterval iv = ids_.interval_of(v);
  MappedFile* m = find(col, iv.index);
  if (m == nullptr) m = create(col, iv.index);
  const std::size_t offset = kFileHeaderSize + iv.offset_of(v) * col.width();
  store_cell(m->data() + offset, col.width(), value);
  if (durable_) m->sync(offset, col.width());
  if (stats != nullptr) {
    stats->seek();
    stats->blocks(1);
    stats->wrote(col.width());
  }
}

std::byte* VertexColumnStore::interval_cells(const ColumnSchema& col, std::uint32_t index,
                                             bool create_missing) {
  MappedFile* m = find(col, index);
  if (m == nullptr && create_missing) m = create(col, index);
  return m == nullptr ? nullptr : m->data() + kFileHeaderSize;
}

void VertexColumnStore::sync_column(const ColumnSchema& col) {
  std::shared_lock lock(mu_);
  for (auto& [key, file] : files_)
    if (key.name == col.name) file->sync_all();
}

}  // namespace palgraph
