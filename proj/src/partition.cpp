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

#include "palgraph/partition.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <system_error>

namespace palgraph {

namespace {

bool before(const EdgeTuple& a, const EdgeTuple& b) noexcept {
  return a.src != b.src ? a.src < b.src : a.dst < b.dst;
}

std::string meta_text(const PartitionInfo& info, std::uint64_t count, IndexKind out_kind) {
  std::ostringstream out;
  out << "level=" << info.level << "\nindex=" << info.index << "\nuid=" << info.uid
      << "\nlo=" << info.lo << "\nhi=" << info.hi << "\nedges=" << count
      << "\nout_index=" << index_kind_name(out_kind) << '\n';
  return out.str();
}

std::map<std::string, std::string> parse_meta(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

fs::path column_file(const fs::path& dir, const ColumnSchema& col) {
  return dir / ("col_" + col.name + ".bin");
}

void write_null_column(const fs::path& path, const ColumnSchema& col, std::uint64_t count,
                       bool sync) {
  FileWriter out(path);
  out.write(make_header(kColumnMagic, static_cast<std::uint32_t>(col.width())));
  std::vector<std::byte> chunk(col.width() * 4096);
  for (std::size_t i = 0; i < 4096; ++i) write_null(col.kind, chunk.data() + i * col.width());
  std::uint64_t left = count;
  while (left > 0) {
    const std::uint64_t n = std::min<std::uint64_t>(left, 4096);
    out.write(chunk.data(), n * col.width());
    left -= n;
  }
  out.finish(sync);
}

/// Pairs (dst, pos) grouped by dst, positions ascending within a group.
std::vector<std::uint32_t> positions_by_dst(const EdgeRun& run, InternalId lo, InternalId hi) {
  const std::size_t n = run.size();
  std::vector<std::uint32_t> order(n);
  const std::uint64_t span = hi - lo + 1;
  if (span <= 4 * static_cast<std::uint64_t>(n) + 1024) {
    // Counting sort keeps positions in order within each dst.
    std::vector<std::uint32_t> start(span + 1, 0);
    for (const auto& e : run.edges) ++start[e.dst - lo + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    for (std::size_t p = 0; p < n; ++p) order[start[run.edges[p].dst - lo]++] = static_cast<std::uint32_t>(p);
  } else {
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const InternalId da = run.edges[a].dst;
      const InternalId db = run.edges[b].dst;
      return da != db ? da < db : a < b;
    });
  }
  return order;
}

}  // namespace

EdgeRun merge_runs(const EdgeRun& older, const EdgeRun& newer) {
  if (older.size() > 0 && newer.size() > 0 && older.row_width != newer.row_width)
    throw Error(Errc::invalid_argument, "merge_runs: row widths differ");
  EdgeRun out;
  out.row_width = older.size() > 0 ? older.row_width : newer.row_width;
  out.reserve(older.size() + newer.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < older.size() || j < newer.size()) {
    if (j == newer.size() || (i < older.size() && !before(newer.edges[j], older.edges[i]))) {
      out.push(older.edges[i], older.row(i));
      ++i;
    } else {
      out.push(newer.edges[j], newer.row(j));
      ++j;
    }
  }
  return out;
}

fs::path partition_dir(const fs::path& db_root, std::uint32_t level, std::uint64_t uid) {
  return db_root / "parts" / ("L" + std::to_string(level)) / ("p" + std::to_string(uid));
}

std::shared_ptr<EdgePartition> EdgePartition::build(const fs::path& db_root,
                                                    const PartitionInfo& info,
                                                    const EdgeRun& run, const Schema& schema,
                                                    const DbConfig& cfg,
                                                    const BuildOptions& opts) {
  const std::size_t n = run.size();
  if (n > kMaxPartitionEdges)
    throw Error(Errc::capacity, "partition would hold " + std::to_string(n) +
                                    " edges; the limit is " + std::to_string(kMaxPartitionEdges));
  if (info.lo > info.hi) throw Error(Errc::invalid_argument, "partition: empty interval union");
  if (n > 0 && run.row_width != schema.row_width())
    throw Error(Errc::invalid_argument, "partition: row width does not match the schema");
  for (std::size_t i = 0; i < n; ++i) {
    const EdgeTuple& e = run.edges[i];
    if (e.dst < info.lo || e.dst > info.hi)
      throw Error(Errc::invalid_argument, "partition: dst " + std::to_string(e.dst) +
                                              " outside [" + std::to_string(info.lo) + ", " +
                                              std::to_string(info.hi) + "]");
    if (e.src >= kMaxVertexIdSpace || e.type > 15)
      throw Error(Errc::invalid_argument, "partition: edge does not fit the entry layout");
    if (i > 0 && before(e, run.edges[i - 1]))
      throw Error(Errc::invalid_argument, "partition: run is not sorted by (src, dst)");
  }

  // Out-start index: first position of every source.
  std::vector<IndexEntry> out_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || run.edges[i].src != run.edges[i - 1].src) out_idx.push_back({run.edges[i].src, i});

  // In-edge chains from one sort of positions by dst.
  std::vector<std::uint64_t> words(n);
  std::vector<IndexEntry> in_idx;
  {
    const auto order = positions_by_dst(run, info.lo, info.hi);
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t p = order[k];
      const InternalId d = run.edges[p].dst;
      const bool last = k + 1 == n || run.edges[order[k + 1]].dst != d;
      const std::uint64_t delta = last ? kChainStop : order[k + 1] - p;
      words[p] = entry::pack(d, run.edges[p].type, delta);
      if (k == 0 || run.edges[order[k - 1]].dst != d) in_idx.push_back({d, p});
    }
  }

  const fs::path final_dir = partition_dir(db_root, info.level, info.uid);
  fs::path tmp = final_dir;
  tmp += ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  std::uint64_t bytes = 0;
  {
    FileWriter out(tmp / "edges.bin");
    out.write(make_header(kEdgesMagic));
    out.write(words.data(), n * 8);
    bytes += out.bytes_written();
    out.finish(opts.sync);
  }
  std::uint64_t idx_bytes = 0;
  if (cfg.out_index == IndexKind::gamma) {
    GammaPairIndex::write_file(tmp / "outidx.gamma", out_idx, opts.sync, &idx_bytes);
  } else {
    DiskPairIndex::write_file(tmp / "outidx.bin", kOutRawMagic, out_idx, opts.sync, &idx_bytes);
  }
  bytes += idx_bytes;
  DiskPairIndex::write_file(tmp / "inidx.bin", kInIndexMagic, in_idx, opts.sync, &idx_bytes,
                            false);
  bytes += idx_bytes;

  std::vector<std::byte> cells;
  for (std::size_t c = 0; c < schema.edge_column_count(); ++c) {
    const ColumnSchema& col = schema.edge_column(c);
    const std::size_t w = col.width();
    const std::size_t off = schema.edge_offset(c);
    cells.resize(n * w);
    for (std::size_t i = 0; i < n; ++i)
      std::memcpy(cells.data() + i * w, run.rows.data() + i * run.row_width + off, w);
    FileWriter out(column_file(tmp, col));
    out.write(make_header(kColumnMagic, static_cast<std::uint32_t>(w)));
    out.write(cells.data(), cells.size());
    bytes += out.bytes_written();
    out.finish(opts.sync);
  }
  write_file_atomic(tmp / "part.meta", meta_text(info, n, cfg.out_index), opts.sync);
  if (opts.sync) fsync_dir(tmp);

  fs::remove_all(final_dir, ec);
  fs::rename(tmp, final_dir);
  if (opts.sync) fsync_dir(final_dir.parent_path());

  if (opts.stats != nullptr) {
    opts.stats->wrote(bytes);
    opts.stats->edges_written(n);
    opts.stats->blocks(ceil_div(bytes, cfg.block_size));
  }
  return open_dir(final_dir, info, cfg);
}

std::shared_ptr<EdgePartition> EdgePartition::open(const fs::path& db_root,
                                                   const PartitionInfo& info,
                                                   const DbConfig& cfg) {
  return open_dir(partition_dir(db_root, info.level, info.uid), info, cfg);
}

std::shared_ptr<EdgePartition> EdgePartition::open_dir(const fs::path& dir,
                                                       const PartitionInfo& info,
                                                       const DbConfig& cfg) {
  if (!fs::is_directory(dir)) throw CorruptionError(dir.string() + ": partition directory missing");
  const auto meta = parse_meta(read_file(dir / "part.meta"));
  auto field = [&](const char* key) -> std::uint64_t {
    auto it = meta.find(key);
    if (it == meta.end()) throw CorruptionError(dir.string() + ": part.meta lacks " + key);
    return std::stoull(it->second);
  };
  if (field("level") != info.level || field("index") != info.index || field("uid") != info.uid ||
      field("lo") != info.lo || field("hi") != info.hi)
    throw CorruptionError(dir.string() + ": part.meta does not match the manifest");
  const IndexKind out_kind = parse_index_kind(meta.at("out_index"));

  std::shared_ptr<EdgePartition> p(new EdgePartition());
  p->info_ = info;
  p->dir_ = dir;
  p->block_size_ = cfg.block_size;
  p->edges_ = MappedFile::open(dir / "edges.bin", true);
  check_header(std::span(p->edges_.data(), std::min(p->edges_.size(), kFileHeaderSize)),
               kEdgesMagic, (dir / "edges.bin").string());
  if ((p->edges_.size() - kFileHeaderSize) % 8 != 0)
    throw CorruptionError(dir.string() + ": edges.bin has a partial entry");
  p->count_ = (p->edges_.size() - kFileHeaderSize) / 8;
  if (p->count_ != field("edges"))
    throw CorruptionError(dir.string() + ": edge count does not match part.meta");
  p->words_ = reinterpret_cast<std::uint64_t*>(p->edges_.data() + kFileHeaderSize);

  if (out_kind == IndexKind::gamma) {
    p->out_index_ = GammaPairIndex::open_file(dir / "outidx.gamma");
  } else {
    p->out_index_ = DiskPairIndex::open_file(
        dir / "outidx.bin", kOutRawMagic,
        out_kind == IndexKind::sparse ? DiskPairIndex::Mode::sparse : DiskPairIndex::Mode::binary,
        cfg.sparse_stride, cfg.block_size);
  }
  p->in_index_ = DiskPairIndex::open_file(dir / "inidx.bin", kInIndexMagic,
                                          DiskPairIndex::Mode::sparse, cfg.sparse_stride,
                                          cfg.block_size);
  return p;
}

EdgePartition::~EdgePartition() {
  if (!obsolete_.load()) return;
  {
    std::lock_guard lock(columns_mu_);
    columns_.clear();
  }
  edges_ = MappedFile();
  out_index_.reset();
  in_index_.reset();
  std::error_code ec;
  fs::remove_all(dir_, ec);
}

std::uint64_t EdgePartition::block_count() const noexcept {
  return std::max<std::uint64_t>(1, ceil_div(count_ * 8, block_size_));
}

void EdgePartition::charge_sequential(std::uint64_t first, std::uint64_t last,
                                      IoStats* stats) const {
  if (stats == nullptr || first >= last) return;
  const std::uint64_t b0 = first * 8 / block_size_;
  const std::uint64_t b1 = (last * 8 - 1) / block_size_;
  stats->seek();
  stats->blocks(b1 - b0 + 1);
  stats->read((last - first) * 8);
}

std::optional<IndexRange> EdgePartition::out_range(InternalId v, IoStats* stats) const {
  return out_index_->find(v, count_, stats);
}

void EdgePartition::out_edges(InternalId v, TypeFilter filter, IoStats* stats,
                              std::vector<PartitionEdge>& out) const {
  auto range = out_range(v, stats);
  if (!range || range->first >= range->next) return;
  charge_sequential(range->first, range->next, stats);
  for (std::uint64_t p = range->first; p < range->next; ++p) {
    const std::uint64_t w = word(p);
    if (filter.accepts(entry::type(w))) out.push_back({p, {v, entry::dst(w), entry::type(w)}});
  }
}

void EdgePartition::in_edges(InternalId v, TypeFilter filter, IoStats* stats,
                             std::vector<PartitionEdge>& out) const {
  if (!covers(v)) return;
  auto head = in_index_->find(v, count_, stats);
  if (!head) return;
  // Seeks: one per change of block along the chain, at most one per block.
  std::uint64_t hop_seeks = 0;
  const std::uint64_t max_seeks = block_count();
  std::uint64_t last_block = UINT64_MAX;
  std::uint64_t pos = head->first;
  std::uint64_t steps = 0;
  for (;;) {
    if (pos >= count_)
      throw CorruptionError(dir_.string() + ": in-edge chain of " + std::to_string(v) +
                            " leaves the edge array at " + std::to_string(pos));
    if (++steps > count_)
      throw CorruptionError(dir_.string() + ": in-edge chain of " + std::to_string(v) + " loops");
    const std::uint64_t w = word(pos);
    if (entry::dst(w) != v)
      throw CorruptionError(dir_.string() + ": in-edge chain of " + std::to_string(v) +
                            " reaches an entry for " + std::to_string(entry::dst(w)));
    const std::uint64_t block = pos * 8 / block_size_;
    if (stats != nullptr && block != last_block) {
      if (hop_seeks < max_seeks) {
        stats->seek();
        ++hop_seeks;
      }
      stats->blocks(1);
      stats->read(8);
    }
    last_block = block;
    if (filter.accepts(entry::type(w))) {
      const IndexEntry src = out_index_->predecessor(pos, stats);
      out.push_back({pos, {src.key, v, entry::type(w)}});
    }
    const std::uint64_t next = entry::next(w);
    if (next == kChainStop) break;
    if (next == 0)
      throw CorruptionError(dir_.string() + ": zero chain delta at " + std::to_string(pos));
    pos += next;
  }
}

EdgeTuple EdgePartition::edge_at(std::uint64_t pos, IoStats* stats) const {
  if (pos >= count_)
    throw Error(Errc::out_of_range, "position " + std::to_string(pos) + " past edge count " +
                                        std::to_string(count_));
  charge_sequential(pos, pos + 1, stats);
  const std::uint64_t w = word(pos);
  const IndexEntry src = out_index_->predecessor(pos, stats);
  return {src.key, entry::dst(w), entry::type(w)};
}

std::uint8_t EdgePartition::set_type(std::uint64_t pos, std::uint8_t type, bool sync) {
  if (pos >= count_) throw Error(Errc::out_of_range, "set_type: position past edge count");
  if (type > 15) throw Error(Errc::invalid_argument, "set_type: type does not fit 4 bits");
  std::atomic_ref<std::uint64_t> cell(words_[pos]);
  std::uint64_t old = cell.load(std::memory_order_relaxed);
  while (!cell.compare_exchange_weak(old, entry::with_type(old, type), std::memory_order_relaxed)) {
  }
  if (sync) edges_.sync(kFileHeaderSize + pos * 8, 8);
  return entry::type(old);
}

const std::vector<IndexEntry>& EdgePartition::sources() const {
  std::call_once(sources_once_, [this] { sources_ = out_index_->entries(nullptr); });
  return sources_;
}

EdgeRun EdgePartition::load_run(const Schema& schema, bool skip_tombstones,
                                IoStats* stats) const {
  EdgeRun run;
  run.row_width = schema.row_width();
  run.reserve(count_);
  std::vector<const std::byte*> cols(schema.edge_column_count());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    cols[c] = column_cells(schema.edge_column(c), false);
    if (stats != nullptr && cols[c] != nullptr)
      stats->read(count_ * schema.edge_column(c).width());
  }
  const std::vector<std::byte> null_row = schema.null_row();
  std::vector<std::byte> row;
  charge_sequential(0, count_, stats);
  // scan() never yields tombstones, so walk the words directly.
  const auto& src = sources();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const std::uint64_t end = k + 1 < src.size() ? src[k + 1].pos : count_;
    for (std::uint64_t p = src[k].pos; p < end; ++p) {
      const std::uint64_t w = word(p);
      if (skip_tombstones && entry::type(w) == kTombstoneType) continue;
      row = null_row;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] == nullptr) continue;
        const std::size_t width = schema.edge_column(c).width();
        load_cell(cols[c] + p * width, width, row.data() + schema.edge_offset(c));
      }
      run.push({src[k].key, entry::dst(w), entry::type(w)}, row);
    }
  }
  return run;
}

std::byte* EdgePartition::column_cells(const ColumnSchema& col, bool create) const {
  std::lock_guard lock(columns_mu_);
  auto it = columns_.find(col.name);
  if (it != columns_.end()) return it->second->data() + kFileHeaderSize;
  const fs::path path = column_file(dir_, col);
  if (!fs::exists(path)) {
    if (!create) return nullptr;
    fs::path tmp = path;
    tmp += ".tmp";
    write_null_column(tmp, col, count_, true);
    fs::rename(tmp, path);
  }
  auto m = std::make_unique<MappedFile>(MappedFile::open(path, true));
  const std::uint32_t width =
      check_header(std::span(m->data(), std::min(m->size(), kFileHeaderSize)), kColumnMagic,
                   path.string());
  if (width != col.width() || m->size() != kFileHeaderSize + count_ * width)
    throw CorruptionError(path.string() + ": column file does not match the edge array");
  std::byte* base = m->data() + kFileHeaderSize;
  columns_[col.name] = std::move(m);
  return base;
}

void EdgePartition::read_cell(const ColumnSchema& col, std::uint64_t pos, void* out,
                              IoStats* stats) const {
  if (pos >= count_) throw Error(Errc::out_of_range, "read_cell: position past edge count");
  if (stats != nullptr) {
    stats->seek();
    stats->blocks(1);
    stats->read(col.width());
  }
  const std::byte* cells = column_cells(col, false);
  if (cells == nullptr) {
    write_null(col.kind, static_cast<std::byte*>(out));
    return;
  }
  load_cell(cells + pos * col.width(), col.width(), out);
}

void EdgePartition::write_cell(const ColumnSchema& col, std::uint64_t pos, const void* value,
                               bool sync, IoStats* stats) {
  if (pos >= count_) throw Error(Errc::out_of_range, "write_cell: position past edge count");
  std::byte* cells = column_cells(col, true);
  store_cell(cells + pos * col.width(), col.width(), value);
  if (sync) {
    std::lock_guard lock(columns_mu_);
    columns_.at(col.name)->sync(kFileHeaderSize + pos * col.width(), col.width());
  }
  if (stats != nullptr) {
    stats->seek();
    stats->blocks(1);
    stats->wrote(col.width());
  }
}

void EdgePartition::sync_column(const ColumnSchema& col) const {
  std::lock_guard lock(columns_mu_);
  auto it = columns_.find(col.name);
  if (it != columns_.end()) it->second->sync_all();
}

}  // namespace palgraph
