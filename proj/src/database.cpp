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

#include "palgraph/database.hpp"

#include <algorithm>
#include <cstring>
#include <iostream>
#include <set>
#include <sstream>

namespace palgraph {

// --- LsmShape ---------------------------------------------------------------

LsmShape::LsmShape(const DbConfig& cfg) : branching_(cfg.branching) {
  std::vector<std::uint32_t> bottom_up{cfg.partitions};
  if (cfg.lsm) {
    while (bottom_up.back() > 1)
      bottom_up.push_back(static_cast<std::uint32_t>(ceil_div(bottom_up.back(), branching_)));
  }
  counts_.assign(bottom_up.rbegin(), bottom_up.rend());
  const std::uint32_t depth = this->depth();
  first_leaf_.resize(depth);
  leaf_owner_.resize(depth);
  auto& leaves = first_leaf_[depth - 1];
  for (std::uint32_t i = 0; i <= cfg.partitions; ++i) leaves.push_back(i);
  for (std::uint32_t level = depth - 1; level >= 1; --level) {
    const auto& below = first_leaf_[level];
    const std::uint32_t n_below = counts_[level];
    auto& bounds = first_leaf_[level - 1];
    for (std::uint32_t k = 0; k < counts_[level - 1]; ++k)
      bounds.push_back(below[std::min(k * branching_, n_below)]);
    bounds.push_back(cfg.partitions);
  }
  for (std::uint32_t level = 1; level <= depth; ++level) {
    auto& owner = leaf_owner_[level - 1];
    owner.resize(cfg.partitions);
    for (std::uint32_t k = 0; k < count(level); ++k)
      for (std::uint32_t leaf = first_leaf(level, k); leaf <= last_leaf(level, k); ++leaf)
        owner[leaf] = k;
  }
}

std::uint64_t LsmShape::total_partitions() const noexcept {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::uint32_t LsmShape::first_child(std::uint32_t /*level*/, std::uint32_t k) const {
  return k * branching_;
}

std::uint32_t LsmShape::last_child(std::uint32_t level, std::uint32_t k) const {
  return std::min((k + 1) * branching_, count(level + 1)) - 1;
}

std::uint64_t DbStats::stored_edges() const noexcept {
  std::uint64_t n = 0;
  for (const auto& l : levels) n += l.edges;
  return n;
}

// --- log records --------------------------------------------------------------

namespace {

enum class Op : std::uint8_t { insert = 1, kill = 2, cell = 3, type = 4 };

class RecordWriter {
 public:
  explicit RecordWriter(Op op) { put(static_cast<std::uint8_t>(op)); }
  template <typename T>
  RecordWriter& put(const T& v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
    return *this;
  }
  RecordWriter& put_bytes(std::span<const std::byte> b) {
    put(static_cast<std::uint32_t>(b.size()));
    bytes_.insert(bytes_.end(), b.begin(), b.end());
    return *this;
  }
  std::vector<std::byte> take() && { return std::move(bytes_); }

 private:
  std::vector<std::byte> bytes_;
};

class RecordReader {
 public:
  explicit RecordReader(std::span<const std::byte> rec) : rec_(rec) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, rec_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::byte> get_bytes() {
    const auto n = get<std::uint32_t>();
    need(n);
    auto out = rec_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > rec_.size()) throw CorruptionError("log record is truncated");
  }
  std::span<const std::byte> rec_;
  std::size_t pos_ = 0;
};

std::vector<std::byte> insert_record(const EdgeTuple& e, std::span<const std::byte> row) {
  RecordWriter w(Op::insert);
  w.put(e.src).put(e.dst).put(e.type).put_bytes(row);
  return std::move(w).take();
}

std::vector<std::byte> slot_record(Op op, const EdgeHandle& h) {
  RecordWriter w(op);
  w.put(h.index).put(h.sub).put(static_cast<std::uint32_t>(h.offset));
  return std::move(w).take();
}

constexpr const char* kManifestTag = "palgraph-manifest 1";

}  // namespace

// --- ReadView -----------------------------------------------------------------

ReadView::ReadView(const Database& db)
    : db_(&db), lock_(db.state_mu_), snap_(db.snap_), schema_(db.schema_) {}

namespace {

struct Probe {
  std::uint32_t level;
  std::uint32_t index;
  const EdgePartition* part;
  std::vector<PartitionEdge> hits;
};

template <typename Fn>
void run_probes(std::vector<Probe>& probes, unsigned threads, Fn&& fn) {
  if (threads <= 1 || probes.size() <= 1) {
    for (auto& p : probes) fn(p);
    return;
  }
  const std::size_t n = std::min<std::size_t>(threads, probes.size());
  std::vector<std::thread> pool;
  pool.reserve(n);
  std::vector<std::exception_ptr> errors(n);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < probes.size(); i += n) fn(probes[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void ReadView::buffered_out_edges(InternalId u, TypeFilter filter,
                                  std::vector<EdgeRecord>& out) const {
  const Database& db = *db_;
  const std::uint32_t s = db.ids_.interval_of(u).index;
  std::vector<std::uint32_t> slots;
  for (std::uint32_t t = 0; t < db.buffers_.size(); ++t) {
    const SubBuffer& b = db.sub(t, s);
    slots.clear();
    b.slots_with_src(u, slots);
    for (auto slot : slots)
      if (filter.accepts(b.edge(slot).type))
        out.push_back({b.edge(slot), {EdgeHandle::kBufferLevel, t, s, slot, b.epoch()}});
  }
}

void ReadView::buffered_in_edges(InternalId u, TypeFilter filter,
                                 std::vector<EdgeRecord>& out) const {
  const Database& db = *db_;
  const std::uint32_t t = db.shape_.owner(1, db.ids_.interval_of(u).index);
  std::vector<std::uint32_t> slots;
  for (std::uint32_t s = 0; s < db.buffers_[t].size(); ++s) {
    const SubBuffer& b = db.sub(t, s);
    slots.clear();
    b.slots_with_dst(u, slots);
    for (auto slot : slots)
      if (filter.accepts(b.edge(slot).type))
        out.push_back({b.edge(slot), {EdgeHandle::kBufferLevel, t, s, slot, b.epoch()}});
  }
}

void ReadView::out_edges(InternalId u, TypeFilter filter, IoStats* stats,
                         std::vector<EdgeRecord>& out) const {
  const Database& db = *db_;
  buffered_out_edges(u, filter, out);
  IoStats local;
  std::vector<Probe> probes;
  for (std::uint32_t level = 1; level <= db.shape_.depth(); ++level) {
    for (std::uint32_t k = 0; k < db.shape_.count(level); ++k) {
      local.probed();
      if (const auto& p = snap_->at(level, k)) probes.push_back({level, k, p.get(), {}});
    }
  }
  run_probes(probes, db.opts_.query_threads,
             [&](Probe& p) { p.part->out_edges(u, filter, &local, p.hits); });
  for (const auto& p : probes)
    for (const auto& h : p.hits) out.push_back({h.edge, {p.level, p.index, 0, h.pos, p.part->uid()}});
  const IoCounters c = local.counters();
  if (stats != nullptr) stats->merge(c);
  db.io_.merge(c);
}

void ReadView::in_edges(InternalId u, TypeFilter filter, IoStats* stats,
                        std::vector<EdgeRecord>& out) const {
  const Database& db = *db_;
  const std::uint32_t leaf = db.ids_.interval_of(u).index;
  buffered_in_edges(u, filter, out);
  IoStats local;
  std::vector<Probe> probes;
  for (std::uint32_t level = 1; level <= db.shape_.depth(); ++level) {
    const std::uint32_t k = db.shape_.owner(level, leaf);
    local.probed();
    if (const auto& p = snap_->at(level, k)) probes.push_back({level, k, p.get(), {}});
  }
  run_probes(probes, db.opts_.query_threads,
             [&](Probe& p) { p.part->in_edges(u, filter, &local, p.hits); });
  for (const auto& p : probes)
    for (const auto& h : p.hits) out.push_back({h.edge, {p.level, p.index, 0, h.pos, p.part->uid()}});
  const IoCounters c = local.counters();
  if (stats != nullptr) stats->merge(c);
  db.io_.merge(c);
}

bool ReadView::valid(const EdgeHandle& h) const {
  try {
    db_->check_handle(*snap_, h);
    return true;
  } catch (const StaleHandleError&) {
    return false;
  }
}

void ReadView::read_edge_cell(const ColumnSchema& col, const EdgeHandle& h, void* out,
                              IoStats* stats) const {
  db_->check_handle(*snap_, h);
  if (h.buffered()) {
    const auto idx = schema_->edge_index(col.name);
    const SubBuffer& b = db_->sub(h.index, h.sub);
    load_cell(b.row(static_cast<std::uint32_t>(h.offset)) + schema_->edge_offset(*idx),
              col.width(), out);
    return;
  }
  snap_->at(h.level, h.index)->read_cell(col, h.offset, out, stats != nullptr ? stats : &db_->io_);
}

// --- Database: lifecycle --------------------------------------------------------

Database::Database(fs::path root, DbConfig cfg, RuntimeOptions opts)
    : root_(std::move(root)),
      cfg_(cfg),
      ids_(cfg),
      shape_(cfg),
      opts_(opts),
      sync_parts_(opts.sync_partitions || cfg.durable_buffers) {
  auto snap = std::make_shared<Snapshot>();
  snap->levels.resize(shape_.depth());
  for (std::uint32_t level = 1; level <= shape_.depth(); ++level)
    snap->levels[level - 1].resize(shape_.count(level));
  snap_ = snap;
  schema_ = std::make_shared<Schema>();
  buffers_.assign(shape_.count(1), std::vector<SubBuffer>(cfg_.partitions, SubBuffer(0)));
}

bool Database::exists(const fs::path& root) { return fs::exists(root / "config"); }

std::unique_ptr<Database> Database::create(const fs::path& root, const DbConfig& cfg,
                                           const RuntimeOptions& opts) {
  cfg.validate();
  if (exists(root)) throw Error(Errc::invalid_argument, root.string() + ": database already exists");
  fs::create_directories(root / "parts");
  cfg.save(root / "config");
  Schema{}.save(root / "schema.txt", true);
  std::unique_ptr<Database> db(new Database(root, cfg, opts));
  if (cfg.durable_buffers) db->wal_ = Wal::create(root / "wal.log", 0, {});
  db->write_manifest(*db->snap_, 0);
  db->open_side_stores();
  db->start_background();
  return db;
}

std::unique_ptr<Database> Database::open(const fs::path& root, const RuntimeOptions& opts) {
  if (!exists(root)) throw Error(Errc::invalid_argument, root.string() + ": no database here");
  const DbConfig cfg = DbConfig::load(root / "config");
  std::unique_ptr<Database> db(new Database(root, cfg, opts));
  db->recover();
  db->open_side_stores();
  db->start_background();
  return db;
}

void Database::open_side_stores() {
  payload_ = PayloadLog::open(root_ / "varlen.log", cfg_.durable_buffers);
  vcols_ = std::make_unique<VertexColumnStore>(root_ / "vcols", ids_, cfg_.durable_buffers);
}

Database::~Database() {
  try {
    close();
  } catch (const std::exception& e) {
    std::cerr << "palgraph: error while closing " << root_ << ": " << e.what() << '\n';
  }
}

void Database::close() {
  {
    std::lock_guard gate(gate_);
    if (closed_) return;
    stop_ = true;
  }
  background_cv_.notify_all();
  if (background_.joinable()) background_.join();
  std::lock_guard gate(gate_);
  closed_ = true;
  flush_all_locked();
}

void Database::start_background() {
  if (opts_.flush_mode != FlushMode::background) return;
  background_ = std::thread([this] { background_loop(); });
}

void Database::background_loop() {
  std::unique_lock gate(gate_);
  while (!stop_) {
    background_cv_.wait(gate, [this] { return stop_ || buffered_slots_ >= cfg_.buffer_capacity; });
    if (stop_) break;
    try {
      while (buffered_slots_ >= cfg_.buffer_capacity && flush_largest_locked()) {
      }
    } catch (const std::exception& e) {
      // Left buffered; the next synchronous flush reports the error.
      std::cerr << "palgraph: background flush failed: " << e.what() << '\n';
      break;
    }
  }
}

// --- manifest and recovery ----------------------------------------------------------

PartitionInfo Database::info_for(std::uint32_t level, std::uint32_t k, std::uint64_t uid) const {
  const std::uint64_t len = ids_.interval_length();
  return {level, k, uid, shape_.first_leaf(level, k) * len,
          (static_cast<std::uint64_t>(shape_.last_leaf(level, k)) + 1) * len - 1};
}

void Database::write_manifest(const Snapshot& snap, std::uint32_t wal_generation) {
  std::ostringstream out;
  out << kManifestTag << "\ngeneration " << snap.generation << "\nwal_generation "
      << wal_generation << "\nnext_uid " << next_uid_ << '\n';
  for (std::uint32_t level = 1; level <= snap.levels.size(); ++level)
    for (std::uint32_t k = 0; k < snap.levels[level - 1].size(); ++k)
      if (const auto& p = snap.at(level, k))
        out << "part " << level << ' ' << k << ' ' << p->uid() << ' ' << p->edge_count() << '\n';
  write_file_atomic(root_ / "MANIFEST", out.str(), true);
}

Database::Manifest Database::read_manifest(const fs::path& root) {
  std::istringstream in(read_file(root / "MANIFEST"));
  std::string line;
  if (!std::getline(in, line) || line != kManifestTag)
    throw CorruptionError((root / "MANIFEST").string() + ": bad header");
  Manifest m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "generation") {
      ls >> m.generation;
    } else if (key == "wal_generation") {
      ls >> m.wal_generation;
    } else if (key == "next_uid") {
      ls >> m.next_uid;
    } else if (key == "part") {
      PartitionInfo p;
      std::uint64_t edges = 0;
      ls >> p.level >> p.index >> p.uid >> edges;
      m.parts.push_back(p);
    } else {
      throw CorruptionError((root / "MANIFEST").string() + ": unknown entry '" + key + "'");
    }
    if (ls.fail()) throw CorruptionError((root / "MANIFEST").string() + ": malformed '" + line + "'");
  }
  return m;
}

void Database::remove_orphans(const Snapshot& snap) {
  std::set<fs::path> live;
  for (const auto& level : snap.levels)
    for (const auto& p : level)
      if (p) live.insert(p->dir());
  const fs::path parts = root_ / "parts";
  if (!fs::exists(parts)) return;
  for (const auto& level_dir : fs::directory_iterator(parts)) {
    if (!level_dir.is_directory()) continue;
    for (const auto& d : fs::directory_iterator(level_dir.path()))
      if (!live.count(d.path())) fs::remove_all(d.path());
  }
}

void Database::recover() {
  schema_ = std::make_shared<Schema>(Schema::load(root_ / "schema.txt"));
  const Manifest m = read_manifest(root_);
  auto snap = std::make_shared<Snapshot>(*snap_);
  snap->generation = m.generation;
  for (const auto& p : m.parts) {
    if (p.level < 1 || p.level > shape_.depth() || p.index >= shape_.count(p.level))
      throw CorruptionError("MANIFEST names a partition outside the tree shape");
    snap->levels[p.level - 1][p.index] =
        EdgePartition::open(root_, info_for(p.level, p.index, p.uid), cfg_);
  }
  snap_ = snap;
  next_uid_ = m.next_uid;
  wal_generation_ = m.wal_generation;
  remove_orphans(*snap);

  const std::size_t stride = row_stride(schema_->row_width());
  for (auto& top : buffers_)
    for (auto& b : top) b = SubBuffer(stride);

  if (!cfg_.durable_buffers) return;
  const fs::path log = root_ / "wal.log";
  const fs::path tmp = root_ / "wal.log.tmp";
  if (fs::exists(tmp)) {
    bool adopt = false;
    try {
      adopt = Wal::read(tmp).generation == wal_generation_;
    } catch (const CorruptionError&) {
      adopt = false;
    }
    // The MANIFEST was committed but the rename did not happen.
    if (adopt) {
      fs::rename(tmp, log);
      fsync_dir(root_);
    } else {
      fs::remove(tmp);
    }
  }
  Wal::Contents contents;
  wal_ = Wal::open(log, &contents);
  if (contents.generation != wal_generation_)
    throw CorruptionError(log.string() + ": log generation " + std::to_string(contents.generation) +
                          " does not match MANIFEST generation " + std::to_string(wal_generation_));
  replay(contents.records);
}

void Database::replay(const std::vector<std::vector<std::byte>>& records) {
  for (const auto& r : records) apply_record(r);
}

void Database::apply_record(std::span<const std::byte> rec) {
  RecordReader in(rec);
  const auto op = static_cast<Op>(in.get<std::uint8_t>());
  if (op == Op::insert) {
    EdgeTuple e;
    e.src = in.get<InternalId>();
    e.dst = in.get<InternalId>();
    e.type = in.get<std::uint8_t>();
    auto bytes = in.get_bytes();
    if (!ids_.is_vertex(e.src) || !ids_.is_vertex(e.dst) || e.type > kMaxUserType)
      throw CorruptionError("log insert record holds an invalid edge");
    std::vector<std::byte> row(bytes.begin(), bytes.end());
    if (row.size() > schema_->row_width()) throw CorruptionError("log row is wider than the schema");
    schema_->pad_row(row);
    row.resize(row_stride(schema_->row_width()));
    insert_locked(e, row, false);
    return;
  }
  EdgeHandle h;
  h.index = in.get<std::uint32_t>();
  h.sub = in.get<std::uint32_t>();
  h.offset = in.get<std::uint32_t>();
  if (h.index >= buffers_.size() || h.sub >= cfg_.partitions ||
      !sub(h.index, h.sub).live(static_cast<std::uint32_t>(h.offset)))
    throw CorruptionError("log record refers to a missing buffered edge");
  SubBuffer& b = sub(h.index, h.sub);
  const auto slot = static_cast<std::uint32_t>(h.offset);
  switch (op) {
    case Op::kill:
      b.kill(slot);
      --buffered_live_;
      break;
    case Op::cell: {
      const auto c = in.get<std::uint32_t>();
      auto value = in.get_bytes();
      if (c >= schema_->edge_column_count() || value.size() != schema_->edge_column(c).width())
        throw CorruptionError("log cell record does not match the schema");
      store_cell(b.row(slot) + schema_->edge_offset(c), value.size(), value.data());
      break;
    }
    case Op::type:
      b.set_type(slot, in.get<std::uint8_t>());
      break;
    default:
      throw CorruptionError("unknown log record type");
  }
}

// --- schema -----------------------------------------------------------------------

std::shared_ptr<const Schema> Database::schema() const {
  std::shared_lock lock(state_mu_);
  return schema_;
}

void Database::add_column(const ColumnSchema& column) {
  std::lock_guard gate(gate_);
  add_column_locked(column);
}

void Database::ensure_column(const ColumnSchema& column) {
  std::lock_guard gate(gate_);
  if (schema_->contains(column.name, column.target)) {
    const ColumnSchema& existing = column.target == ColumnTarget::edge
                                       ? schema_->edge_column(column.name)
                                       : *schema_->vertex_column(column.name);
    if (existing.kind != column.kind)
      throw Error(Errc::schema, "column '" + column.name + "' exists with kind " +
                                    column_kind_name(existing.kind));
    return;
  }
  add_column_locked(column);
}

void Database::add_column_locked(const ColumnSchema& column) {
  auto next = std::make_shared<Schema>(*schema_);
  next->add(column);
  next->save(root_ / "schema.txt", true);
  std::unique_lock lock(state_mu_);
  if (column.target == ColumnTarget::edge) {
    auto null_row = next->null_row();
    const std::size_t stride = row_stride(next->row_width());
    null_row.resize(stride);
    for (auto& top : buffers_)
      for (auto& b : top) b.restride(stride, null_row);
  }
  schema_ = next;
}

ColumnSchema Database::vertex_column(std::string_view name) const {
  auto col = schema()->vertex_column(name);
  if (!col) throw Error(Errc::schema, "no vertex column named '" + std::string(name) + "'");
  return *col;
}

// --- writes -------------------------------------------------------------------------

std::uint64_t Database::log(std::span<const std::byte> rec) {
  return wal_ ? wal_->append(rec) : 0;
}

void Database::after_write(std::unique_lock<std::mutex>& gate, std::uint64_t lsn) {
  if (buffered_slots_ >= cfg_.buffer_capacity) {
    // Background mode still stalls the writer once buffers reach twice the
    // capacity.
    if (opts_.flush_mode == FlushMode::synchronous ||
        buffered_slots_ >= 2 * cfg_.buffer_capacity) {
      while (buffered_slots_ >= cfg_.buffer_capacity && flush_largest_locked()) {
      }
    } else {
      background_cv_.notify_one();
    }
  }
  gate.unlock();
  if (wal_ && lsn > 0) wal_->sync(lsn);
}

void Database::insert_locked(const EdgeTuple& e, std::span<const std::byte> row, bool /*logged*/) {
  const std::uint32_t t = top_of(e.dst);
  const std::uint32_t s = ids_.interval_of(e.src).index;
  std::unique_lock lock(state_mu_);
  sub(t, s).add(e, row);
  ++buffered_slots_;
  ++buffered_live_;
}

namespace {

std::vector<std::byte> make_row(const Schema& schema, const AttributeRow* attrs) {
  std::vector<std::byte> row;
  if (attrs == nullptr) {
    row = schema.null_row();
  } else {
    if (attrs->bytes().size() > schema.row_width())
      throw Error(Errc::schema, "attribute row does not belong to this database");
    row.assign(attrs->bytes().begin(), attrs->bytes().end());
    schema.pad_row(row);
  }
  return row;
}

}  // namespace

void Database::insert_edge(OriginalId src, OriginalId dst, std::uint8_t type,
                           const AttributeRow* attrs) {
  if (type > kMaxUserType)
    throw Error(Errc::invalid_argument, "edge type " + std::to_string(type) + " is reserved or too large");
  const EdgeTuple e{ids_.to_internal(src), ids_.to_internal(dst), type};
  std::unique_lock gate(gate_);
  if (closed_) throw Error(Errc::invalid_argument, "database is closed");
  std::vector<std::byte> row = make_row(*schema_, attrs);
  const std::uint64_t lsn = log(insert_record(e, row));
  row.resize(row_stride(schema_->row_width()));
  insert_locked(e, row, true);
  after_write(gate, lsn);
}

bool Database::delete_edge(OriginalId src_orig, OriginalId dst_orig, std::uint8_t type) {
  const InternalId src = ids_.to_internal(src_orig);
  const InternalId dst = ids_.to_internal(dst_orig);
  if (type > kMaxUserType) return false;
  std::unique_lock gate(gate_);
  if (closed_) throw Error(Errc::invalid_argument, "database is closed");
  bool found = false;
  std::uint64_t lsn = 0;
  const std::uint32_t t = top_of(dst);
  const std::uint32_t s = ids_.interval_of(src).index;
  std::vector<std::uint32_t> slots;
  sub(t, s).slots_with_src(src, slots);
  for (auto slot : slots) {
    const EdgeTuple& e = sub(t, s).edge(slot);
    if (e.dst != dst || e.type != type) continue;
    lsn = log(slot_record(Op::kill, {0, t, s, slot, 0}));
    std::unique_lock lock(state_mu_);
    sub(t, s).kill(slot);
    --buffered_live_;
    found = true;
  }
  const std::uint32_t leaf = ids_.interval_of(dst).index;
  for (std::uint32_t level = 1; level <= shape_.depth(); ++level) {
    const auto& part = snap_->at(level, shape_.owner(level, leaf));
    if (!part) continue;
    auto range = part->out_range(src, &io_);
    if (!range) continue;
    for (std::uint64_t p = range->first; p < range->next; ++p) {
      const std::uint64_t w = part->word(p);
      if (entry::dst(w) == dst && entry::type(w) == type) {
        part->set_type(p, kTombstoneType, cfg_.durable_buffers);
        found = true;
      }
    }
  }
  after_write(gate, lsn);
  return found;
}

bool Database::insert_or_update_edge(OriginalId src_orig, OriginalId dst_orig, std::uint8_t type,
                                     const AttributeRow& attrs) {
  if (type > kMaxUserType)
    throw Error(Errc::invalid_argument, "edge type " + std::to_string(type) + " is reserved or too large");
  const EdgeTuple e{ids_.to_internal(src_orig), ids_.to_internal(dst_orig), type};
  std::unique_lock gate(gate_);
  if (closed_) throw Error(Errc::invalid_argument, "database is closed");
  const Schema& schema = *schema_;
  if (attrs.bytes().size() > schema.row_width())
    throw Error(Errc::schema, "attribute row does not belong to this database");
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < attrs.schema().edge_column_count(); ++c)
    if ((attrs.set_mask() >> c) & 1u) cols.push_back(c);

  bool found = false;
  std::uint64_t lsn = 0;
  const std::uint32_t t = top_of(e.dst);
  const std::uint32_t s = ids_.interval_of(e.src).index;
  std::vector<std::uint32_t> slots;
  sub(t, s).slots_with_src(e.src, slots);
  for (auto slot : slots) {
    const EdgeTuple& b = sub(t, s).edge(slot);
    if (b.dst != e.dst || b.type != e.type) continue;
    found = true;
    for (auto c : cols) {
      const std::size_t off = schema.edge_offset(c);
      const std::size_t w = schema.edge_column(c).width();
      RecordWriter rec(Op::cell);
      rec.put(t).put(s).put(slot).put(static_cast<std::uint32_t>(c))
          .put_bytes(attrs.bytes().subspan(off, w));
      lsn = log(std::move(rec).take());
      std::unique_lock lock(state_mu_);
      store_cell(sub(t, s).row(slot) + off, w, attrs.bytes().data() + off);
    }
  }
  const std::uint32_t leaf = ids_.interval_of(e.dst).index;
  for (std::uint32_t level = 1; level <= shape_.depth(); ++level) {
    const auto& part = snap_->at(level, shape_.owner(level, leaf));
    if (!part) continue;
    auto range = part->out_range(e.src, &io_);
    if (!range) continue;
    for (std::uint64_t p = range->first; p < range->next; ++p) {
      const std::uint64_t w = part->word(p);
      if (entry::dst(w) != e.dst || entry::type(w) != e.type) continue;
      found = true;
      for (auto c : cols)
        part->write_cell(schema.edge_column(c), p, attrs.bytes().data() + schema.edge_offset(c),
                         cfg_.durable_buffers, &io_);
    }
  }
  if (!found) {
    std::vector<std::byte> row = make_row(schema, &attrs);
    lsn = log(insert_record(e, row));
    row.resize(row_stride(schema.row_width()));
    insert_locked(e, row, true);
  }
  after_write(gate, lsn);
  return found;
}

void Database::check_handle(const Snapshot& snap, const EdgeHandle& h) const {
  if (h.buffered()) {
    if (h.index >= buffers_.size() || h.sub >= buffers_[h.index].size())
      throw StaleHandleError("edge handle names no buffer");
    const SubBuffer& b = sub(h.index, h.sub);
    if (b.epoch() != h.generation || h.offset >= b.slots() ||
        !b.live(static_cast<std::uint32_t>(h.offset)))
      throw StaleHandleError("buffered edge has been flushed or deleted; query again");
    return;
  }
  if (h.level < 1 || h.level > shape_.depth() || h.index >= shape_.count(h.level))
    throw StaleHandleError("edge handle names no partition");
  const auto& part = snap.at(h.level, h.index);
  if (!part || part->uid() != h.generation)
    throw StaleHandleError("partition has been replaced; query again");
  if (h.offset >= part->edge_count() || entry::type(part->word(h.offset)) == kTombstoneType)
    throw StaleHandleError("edge has been deleted");
}

void Database::set_edge_type(const EdgeHandle& h, std::uint8_t type) {
  if (type > kMaxUserType)
    throw Error(Errc::invalid_argument, "edge type " + std::to_string(type) + " is reserved or too large");
  std::unique_lock gate(gate_);
  check_handle(*snap_, h);
  std::uint64_t lsn = 0;
  if (h.buffered()) {
    RecordWriter rec(Op::type);
    rec.put(h.index).put(h.sub).put(static_cast<std::uint32_t>(h.offset)).put(type);
    lsn = log(std::move(rec).take());
    std::unique_lock lock(state_mu_);
    sub(h.index, h.sub).set_type(static_cast<std::uint32_t>(h.offset), type);
  } else {
    snap_->at(h.level, h.index)->set_type(h.offset, type, cfg_.durable_buffers);
  }
  after_write(gate, lsn);
}

void Database::write_edge_cell(std::size_t c, const EdgeHandle& h, const void* value) {
  std::unique_lock gate(gate_);
  check_handle(*snap_, h);
  const ColumnSchema& col = schema_->edge_column(c);
  std::uint64_t lsn = 0;
  if (h.buffered()) {
    RecordWriter rec(Op::cell);
    rec.put(h.index).put(h.sub).put(static_cast<std::uint32_t>(h.offset))
        .put(static_cast<std::uint32_t>(c))
        .put_bytes({static_cast<const std::byte*>(value), col.width()});
    lsn = log(std::move(rec).take());
    std::unique_lock lock(state_mu_);
    store_cell(sub(h.index, h.sub).row(static_cast<std::uint32_t>(h.offset)) +
                   schema_->edge_offset(c),
               col.width(), value);
  } else {
    snap_->at(h.level, h.index)->write_cell(col, h.offset, value, cfg_.durable_buffers, &io_);
  }
  after_write(gate, lsn);
}

void Database::write_vertex_cell(const ColumnSchema& col, InternalId v, const void* value) {
  std::lock_guard gate(gate_);
  vcols_->write(col, v, value, &io_);
}

void Database::read_vertex_cell(const ColumnSchema& col, InternalId v, void* out) const {
  vcols_->read(col, v, out, &io_);
}

PayloadRef Database::append_payload(std::string_view bytes) {
  const PayloadRef ref = payload_->append(bytes);
  io_.wrote(bytes.size() + 8);
  return ref;
}

std::string Database::read_payload(PayloadRef ref) const {
  std::string out = payload_->read(ref);
  io_.seek();
  io_.read(out.size() + 8);
  return out;
}

// --- flush and merge -------------------------------------------------------------------

void Database::flush() {
  std::lock_guard gate(gate_);
  flush_all_locked();
}

bool Database::flush_largest() {
  std::lock_guard gate(gate_);
  return flush_largest_locked();
}

void Database::flush_all_locked() {
  while (buffered_slots_ > 0 && flush_largest_locked()) {
  }
}

bool Database::flush_largest_locked() {
  std::uint32_t best = 0;
  std::uint64_t best_size = 0;
  for (std::uint32_t t = 0; t < buffers_.size(); ++t)
    for (const auto& b : buffers_[t])
      if (b.slots() > best_size) {
        best_size = b.slots();
        best = t;
      }
  if (best_size == 0) return false;
  flush_top(best);
  return true;
}

void Database::flush_top(std::uint32_t t) {
  const Snapshot& snap = *snap_;
  const Schema& schema = *schema_;
  struct Item {
    EdgeTuple e;
    std::uint32_t s;
    std::uint32_t slot;
  };
  std::vector<Item> items;
  for (std::uint32_t s = 0; s < buffers_[t].size(); ++s) {
    const SubBuffer& b = sub(t, s);
    for (std::uint32_t slot = 0; slot < b.slots(); ++slot)
      if (b.live(slot)) items.push_back({b.edge(slot), s, slot});
  }
  // Equal sources share a sub-buffer, so slot order is arrival order.
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.e.src != b.e.src) return a.e.src < b.e.src;
    if (a.e.dst != b.e.dst) return a.e.dst < b.e.dst;
    return a.slot < b.slot;
  });
  EdgeRun fresh;
  fresh.row_width = schema.row_width();
  fresh.reserve(items.size());
  for (const auto& it : items) fresh.push(it.e, {sub(t, it.s).row(it.slot), schema.row_width()});

  std::vector<Change> changes;
  try {
    EdgeRun merged = fresh;
    if (const auto& old = snap.at(1, t)) merged = merge_runs(old->load_run(schema, true, &io_), fresh);
    place(1, t, std::move(merged), snap, changes);
    publish(std::move(changes), t);
  } catch (...) {
    for (auto& c : changes)
      if (c.part) c.part->mark_obsolete();
    throw;
  }
}

void Database::place(std::uint32_t level, std::uint32_t k, EdgeRun run, const Snapshot& snap,
                     std::vector<Change>& changes) {
  const bool leaf = level == shape_.depth();
  if (!leaf && run.size() >= cfg_.max_partition_edges) {
    ++merges_;
    const std::uint32_t c0 = shape_.first_child(level, k);
    const std::uint32_t c1 = shape_.last_child(level, k);
    std::vector<EdgeRun> routed(c1 - c0 + 1);
    for (auto& r : routed) r.row_width = run.row_width;
    for (std::size_t i = 0; i < run.size(); ++i) {
      const std::uint32_t c = shape_.owner(level + 1, ids_.interval_of(run.edges[i].dst).index);
      routed[c - c0].push(run.edges[i], run.row(i));
    }
    run = EdgeRun();
    for (std::uint32_t c = c0; c <= c1; ++c) {
      EdgeRun& part = routed[c - c0];
      if (part.size() == 0) continue;
      EdgeRun merged;
      if (const auto& old = snap.at(level + 1, c)) {
        merged = merge_runs(old->load_run(*schema_, true, &io_), part);
      } else {
        merged = std::move(part);
      }
      part = EdgeRun();
      place(level + 1, c, std::move(merged), snap, changes);
    }
    changes.push_back({level, k, nullptr});
    return;
  }
  if (run.size() > kMaxPartitionEdges)
    throw Error(Errc::capacity, "leaf partition would exceed " + std::to_string(kMaxPartitionEdges) +
                                    " edges; recreate the database with more partitions");
  if (run.size() == 0) {
    changes.push_back({level, k, nullptr});
    return;
  }
  const PartitionInfo info = info_for(level, k, next_uid_++);
  changes.push_back(
      {level, k, EdgePartition::build(root_, info, run, *schema_, cfg_, {sync_parts_, &io_})});
}

std::vector<std::vector<std::byte>> Database::buffer_records(std::uint32_t skip_top) const {
  std::vector<std::vector<std::byte>> recs;
  const std::size_t width = schema_->row_width();
  for (std::uint32_t t = 0; t < buffers_.size(); ++t) {
    if (t == skip_top) continue;
    for (const auto& b : buffers_[t])
      for (std::uint32_t slot = 0; slot < b.slots(); ++slot)
        if (b.live(slot)) recs.push_back(insert_record(b.edge(slot), {b.row(slot), width}));
  }
  return recs;
}

void Database::publish(std::vector<Change> changes, std::uint32_t flushed_top) {
  auto next = std::make_shared<Snapshot>(*snap_);
  ++next->generation;
  std::vector<std::shared_ptr<EdgePartition>> replaced;
  for (auto& c : changes) {
    auto& slot = next->levels[c.level - 1][c.index];
    if (slot && slot != c.part) replaced.push_back(slot);
    slot = c.part;
  }
  if (wal_) {
    const fs::path tmp = root_ / "wal.log.tmp";
    auto fresh = Wal::create(tmp, wal_generation_ + 1, buffer_records(flushed_top));
    write_manifest(*next, wal_generation_ + 1);
    fs::rename(tmp, root_ / "wal.log");
    fsync_dir(root_);
    wal_->adopt(std::move(*fresh));
    ++wal_generation_;
  } else {
    write_manifest(*next, wal_generation_);
  }
  {
    std::unique_lock lock(state_mu_);
    snap_ = next;
    for (auto& b : buffers_[flushed_top]) b.clear(++epoch_);
    for (std::uint32_t t = 0; t < buffers_.size(); ++t)
      if (t != flushed_top)
        for (auto& b : buffers_[t])
          if (b.compact(epoch_ + 1)) ++epoch_;
    buffered_slots_ = 0;
    buffered_live_ = 0;
    for (const auto& top : buffers_)
      for (const auto& b : top) {
        buffered_slots_ += b.slots();
        buffered_live_ += b.live_count();
      }
  }
  for (auto& p : replaced) p->mark_obsolete();
  ++flushes_;
}

// --- reads ---------------------------------------------------------------------------------

Edge Database::to_original(const EdgeRecord& r) const {
  return {ids_.to_original(r.edge.src), ids_.to_original(r.edge.dst), r.edge.type, r.handle};
}

std::vector<Edge> Database::out_edges(OriginalId u, TypeFilter filter, IoStats* stats) const {
  const InternalId v = ids_.to_internal(u);
  std::vector<EdgeRecord> recs;
  read_view().out_edges(v, filter, stats, recs);
  std::vector<Edge> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(to_original(r));
  return out;
}

std::vector<Edge> Database::in_edges(OriginalId u, TypeFilter filter, IoStats* stats) const {
  const InternalId v = ids_.to_internal(u);
  std::vector<EdgeRecord> recs;
  read_view().in_edges(v, filter, stats, recs);
  std::vector<Edge> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(to_original(r));
  return out;
}

std::uint64_t Database::buffered_edges() const {
  std::shared_lock lock(state_mu_);
  return buffered_live_;
}

DbStats Database::stats() const {
  DbStats st;
  st.flushes = flushes_.load();
  st.downstream_merges = merges_.load();
  std::shared_lock lock(state_mu_);
  st.generation = snap_->generation;
  for (std::uint32_t level = 1; level <= shape_.depth(); ++level) {
    LevelStats ls;
    ls.level = level;
    ls.slots = shape_.count(level);
    for (std::uint32_t k = 0; k < ls.slots; ++k) {
      const auto& p = snap_->at(level, k);
      if (!p) continue;
      ++ls.nonempty;
      ls.edges += p->edge_count();
      ls.edge_bytes += p->edges_file_bytes();
      ls.out_index_file_bytes += p->out_index().file_bytes();
      ls.out_index_memory_bytes += p->out_index().memory_bytes();
      ls.out_index_raw_bytes += p->out_index().raw_bytes();
      ls.in_index_bytes += p->in_index().file_bytes();
    }
    st.levels.push_back(ls);
  }
  st.buffered_slots = buffered_slots_;
  st.buffered_live = buffered_live_;
  st.buffer_capacity = cfg_.buffer_capacity;
  st.wal_syncs = wal_ ? wal_->syncs() : 0;
  st.payload_bytes = payload_ ? payload_->end() : 0;
  st.io = io_.counters();
  return st;
}

// --- ExclusiveSession --------------------------------------------------------------------

Database::ExclusiveSession::ExclusiveSession(Database& db) : db_(db), gate_(db.gate_) {
  if (db_.closed_) throw Error(Errc::invalid_argument, "database is closed");
  db_.flush_all_locked();
}

void Database::ExclusiveSession::ensure_column(const ColumnSchema& column) {
  if (db_.schema_->contains(column.name, column.target)) return;
  db_.add_column_locked(column);
}

}  // namespace palgraph
