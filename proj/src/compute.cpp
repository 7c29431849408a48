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

#include "palgraph/compute.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <thread>

namespace palgraph::compute {

namespace {

struct PartSlot {
  std::uint32_t level;
  std::uint32_t index;
  std::shared_ptr<EdgePartition> part;
};

void charge(IoStats& io, std::uint64_t bytes, std::uint32_t block_size, bool write) {
  if (bytes == 0) return;
  io.seek();
  io.blocks(ceil_div(bytes, block_size));
  if (write)
    io.wrote(bytes);
  else
    io.read(bytes);
}

/// Stable bucket sort of refs by key - lo, keys in [lo, lo + span).
template <typename Key>
void bucket_by(std::vector<EdgeRef>& refs, InternalId lo, std::uint64_t span, Key key,
               std::vector<std::uint64_t>& offsets) {
  offsets.assign(span + 1, 0);
  for (const auto& r : refs) ++offsets[key(r) - lo + 1];
  for (std::uint64_t i = 0; i < span; ++i) offsets[i + 1] += offsets[i];
  std::vector<EdgeRef> sorted(refs.size());
  std::vector<std::uint64_t> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& r : refs) sorted[fill[key(r) - lo]++] = r;
  refs = std::move(sorted);
}

}  // namespace

struct PswEngine::State {
  explicit State(Database& d) : db(d), session(d) {}

  Database& db;
  Database::ExclusiveSession session;
  std::vector<PartSlot> parts;
  std::vector<std::size_t> edge_width;
  std::vector<std::vector<std::byte*>> edge_cells;  // [col][part]
  std::vector<ColumnSchema> vertex_cols;
  std::vector<std::byte*> vertex_base;  // [col], current interval
};

OriginalId VertexContext::original() const { return engine_->ids().to_original(id_); }

std::byte* VertexContext::cell(std::size_t col, const EdgeRef& e) const {
  return engine_->st_->edge_cells[col][e.part] + e.pos * engine_->st_->edge_width[col];
}

std::byte* VertexContext::vertex_cell(std::size_t col) const {
  return engine_->st_->vertex_base[col] + offset_ * engine_->st_->vertex_cols[col].width();
}

PswEngine::PswEngine(Database& db) : st_(std::make_unique<State>(db)) {}
PswEngine::~PswEngine() = default;

const IdSpace& PswEngine::ids() const noexcept { return st_->db.ids(); }

void PswEngine::for_each_vertex_cell(std::size_t col,
                                     const std::function<void(InternalId, std::byte*)>& fn) {
  const IdSpace& ids = st_->db.ids();
  const ColumnSchema& c = st_->vertex_cols.at(col);
  for (std::uint32_t i = 0; i < ids.partitions(); ++i) {
    std::byte* base = st_->session.vertex_store().interval_cells(c, i, true);
    const VertexInterval iv = ids.interval(i);
    for (InternalId v = iv.lo; v <= iv.hi; ++v)
      if (ids.is_vertex(v)) fn(v, base + (v - iv.lo) * c.width());
  }
}

RunStats PswEngine::run(PswProgram& program, unsigned iterations) {
  State& st = *st_;
  Database& db = st.db;
  const DbConfig& cfg = db.config();
  const IdSpace& ids = db.ids();
  const LsmShape& shape = db.shape();
  const TypeFilter filter = program.filter();
  const std::uint32_t bs = cfg.block_size;

  const std::vector<EdgeColumnUse> ecols = program.edge_columns();
  st.vertex_cols = program.vertex_columns();
  for (const auto& c : ecols) {
    if (c.column.target != ColumnTarget::edge) throw Error(Errc::schema, "edge column expected");
    st.session.ensure_column(c.column);
  }
  for (const auto& c : st.vertex_cols) {
    if (c.target != ColumnTarget::vertex) throw Error(Errc::schema, "vertex column expected");
    st.session.ensure_column(c);
  }

  const ReadView view = st.session.view();
  for (const auto& c : ecols)
    if (view.schema().edge_column(c.column.name).kind != c.column.kind)
      throw Error(Errc::schema, "column '" + c.column.name + "' exists with another kind");

  st.parts.clear();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> slot_of;
  for (std::uint32_t level = 1; level <= shape.depth(); ++level)
    for (std::uint32_t k = 0; k < shape.count(level); ++k)
      if (const auto& p = view.snapshot().at(level, k)) {
        slot_of[{level, k}] = static_cast<std::uint32_t>(st.parts.size());
        st.parts.push_back({level, k, p});
      }
  st.edge_width.clear();
  st.edge_cells.assign(ecols.size(), {});
  for (std::size_t c = 0; c < ecols.size(); ++c) {
    st.edge_width.push_back(ecols[c].column.width());
    for (const auto& ps : st.parts) st.edge_cells[c].push_back(ps.part->column_cells(ecols[c].column, true));
  }
  st.vertex_base.assign(st.vertex_cols.size(), nullptr);

  const unsigned threads = program.independent() ? std::max(1u, db.options().compute_threads) : 1u;
  const std::uint64_t len = ids.interval_length();
  RunStats stats;

  for (unsigned it = 0; it < iterations; ++it) {
    program.before_iteration(it);
    IoStats io;
    std::vector<EdgeColumnUse> use;
    for (std::size_t c = 0; c < ecols.size(); ++c) use.push_back(program.access(c, it));

    // Owner partitions stay loaded from their first interval to their last.
    std::map<std::uint32_t, std::vector<EdgeRef>> loaded;
    std::uint64_t loaded_edges = 0;
    std::vector<std::size_t> cursor(st.parts.size(), 0);

    for (std::uint32_t i = 0; i < ids.partitions(); ++i) {
      const VertexInterval iv = ids.interval(i);

      std::vector<EdgeRef> in;
      for (std::uint32_t level = 1; level <= shape.depth(); ++level) {
        auto found = slot_of.find({level, shape.owner(level, i)});
        if (found == slot_of.end()) continue;
        const std::uint32_t pi = found->second;
        auto li = loaded.find(pi);
        if (li == loaded.end()) {
          const EdgePartition& p = *st.parts[pi].part;
          if (loaded_edges + p.edge_count() > db.options().psw_memory_edges)
            throw Error(Errc::capacity,
                        "PSW: owner partitions of interval " + std::to_string(i) + " hold " +
                            std::to_string(loaded_edges + p.edge_count()) +
                            " edges, over the memory budget of " +
                            std::to_string(db.options().psw_memory_edges) +
                            "; recreate the database with more partitions or raise the budget");
          std::vector<EdgeRef> refs;
          refs.reserve(p.edge_count());
          p.scan(filter, &io, [&](std::uint64_t pos, const EdgeTuple& e) { refs.push_back({e, pi, pos}); });
          for (std::size_t c = 0; c < ecols.size(); ++c)
            if (use[c].in_side & kRead) charge(io, p.edge_count() * st.edge_width[c], bs, false);
          std::stable_sort(refs.begin(), refs.end(),
                           [](const EdgeRef& a, const EdgeRef& b) { return a.edge.dst < b.edge.dst; });
          loaded_edges += p.edge_count();
          li = loaded.emplace(pi, std::move(refs)).first;
        }
        const auto& refs = li->second;
        auto a = std::lower_bound(refs.begin(), refs.end(), iv.lo,
                                  [](const EdgeRef& r, InternalId v) { return r.edge.dst < v; });
        auto b = std::upper_bound(a, refs.end(), iv.hi,
                                  [](InternalId v, const EdgeRef& r) { return v < r.edge.dst; });
        in.insert(in.end(), a, b);
      }

      std::vector<EdgeRef> out;
      for (std::uint32_t pi = 0; pi < st.parts.size(); ++pi) {
        const EdgePartition& p = *st.parts[pi].part;
        const auto& src = p.sources();
        std::size_t& k = cursor[pi];
        while (k < src.size() && src[k].key < iv.lo) ++k;
        const std::size_t k0 = k;
        while (k < src.size() && src[k].key <= iv.hi) ++k;
        if (k == k0) continue;
        const std::uint64_t first = src[k0].pos;
        const std::uint64_t last = k < src.size() ? src[k].pos : p.edge_count();
        p.charge_sequential(first, last, &io);
        for (std::size_t c = 0; c < ecols.size(); ++c) {
          const std::uint64_t bytes = (last - first) * st.edge_width[c];
          if (use[c].out_side & kRead) charge(io, bytes, bs, false);
          if (use[c].out_side & kWrite) charge(io, bytes, bs, true);
        }
        for (std::size_t s = k0; s < k; ++s) {
          const std::uint64_t end = s + 1 < src.size() ? src[s + 1].pos : p.edge_count();
          for (std::uint64_t pos = src[s].pos; pos < end; ++pos) {
            const std::uint64_t w = p.word(pos);
            if (filter.accepts(entry::type(w)))
              out.push_back({{src[s].key, entry::dst(w), entry::type(w)}, pi, pos});
          }
        }
      }

      std::vector<std::uint64_t> in_off, out_off;
      bucket_by(in, iv.lo, len, [](const EdgeRef& r) { return r.edge.dst; }, in_off);
      bucket_by(out, iv.lo, len, [](const EdgeRef& r) { return r.edge.src; }, out_off);

      for (std::size_t c = 0; c < st.vertex_cols.size(); ++c) {
        st.vertex_base[c] = st.session.vertex_store().interval_cells(st.vertex_cols[c], i, true);
        charge(io, len * st.vertex_cols[c].width(), bs, false);
      }

      const auto update_range = [&](std::uint64_t from, std::uint64_t to) {
        VertexContext ctx;
        ctx.engine_ = this;
        for (std::uint64_t off = from; off < to; ++off) {
          const InternalId v = iv.lo + off;
          if (!ids.is_vertex(v)) continue;
          ctx.id_ = v;
          ctx.offset_ = off;
          ctx.in_ = std::span<const EdgeRef>(in.data() + in_off[off], in_off[off + 1] - in_off[off]);
          ctx.out_ = std::span<const EdgeRef>(out.data() + out_off[off], out_off[off + 1] - out_off[off]);
          program.update(ctx, it);
        }
      };
      if (threads <= 1) {
        update_range(0, len);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        const std::uint64_t chunk = ceil_div(len, threads);
        for (unsigned t = 0; t < threads; ++t)
          pool.emplace_back([&, t] {
            try {
              update_range(std::min(len, t * chunk), std::min(len, (t + 1) * chunk));
            } catch (...) {
              errors[t] = std::current_exception();
            }
          });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
      }
      for (std::uint64_t off = 0; off < len; ++off)
        if (ids.is_vertex(iv.lo + off)) ++stats.vertex_updates;
      stats.edges_visited += in.size() + out.size();

      for (std::size_t c = 0; c < st.vertex_cols.size(); ++c)
        charge(io, len * st.vertex_cols[c].width(), bs, true);

      // Write back and drop owners whose last interval this was.
      for (auto li = loaded.begin(); li != loaded.end();) {
        const PartSlot& ps = st.parts[li->first];
        if (shape.last_leaf(ps.level, ps.index) != i) {
          ++li;
          continue;
        }
        for (std::size_t c = 0; c < ecols.size(); ++c)
          if (use[c].in_side & kWrite) charge(io, ps.part->edge_count() * st.edge_width[c], bs, true);
        loaded_edges -= ps.part->edge_count();
        li = loaded.erase(li);
      }
    }
    const IoCounters c = io.counters();
    stats.per_iteration.push_back(c);
    db.io().merge(c);
    ++stats.iterations;
    if (!program.after_iteration(it, *this)) break;
  }

  if (st.session.durable()) {
    for (std::size_t c = 0; c < ecols.size(); ++c)
      for (const auto& ps : st.parts) ps.part->sync_column(ecols[c].column);
    for (const auto& c : st.vertex_cols) st.session.vertex_store().sync_column(c);
  }
  return stats;
}

std::uint64_t edge_sweep(const ReadView& view, TypeFilter filter, IoStats* stats,
                         const std::function<void(const EdgeTuple&)>& fn) {
  std::uint64_t n = 0;
  view.scan_buffers(filter, [&](const EdgeRecord& r) {
    fn(r.edge);
    ++n;
  });
  const LsmShape& shape = view.db().shape();
  for (std::uint32_t level = 1; level <= shape.depth(); ++level)
    for (std::uint32_t k = 0; k < shape.count(level); ++k)
      if (const auto& p = view.snapshot().at(level, k))
        p->scan(filter, stats, [&](std::uint64_t, const EdgeTuple& e) {
          fn(e);
          ++n;
        });
  return n;
}

// --- Pagerank --------------------------------------------------------------------

namespace {

/// Contributions rank/outdeg live on the out-edges, alternating between two
/// columns so every iteration reads only the previous one. Iteration 0
/// seeds the uniform vector. Written ranks are unnormalized; the sum of the
/// previous iteration rescales the contributions read in the next.
class PagerankProgram final : public PswProgram {
 public:
  PagerankProgram(const PagerankOptions& opts, std::uint64_t vertices)
      : opts_(opts), n_(static_cast<double>(vertices)) {}

  std::vector<EdgeColumnUse> edge_columns() const override {
    return {{{opts_.column + "_c0", ColumnKind::float64, ColumnTarget::edge}, kRead, kWrite},
            {{opts_.column + "_c1", ColumnKind::float64, ColumnTarget::edge}, kRead, kWrite}};
  }
  std::vector<ColumnSchema> vertex_columns() const override {
    return {{opts_.column, ColumnKind::float64, ColumnTarget::vertex}};
  }
  bool independent() const override { return true; }

  EdgeColumnUse access(std::size_t col, unsigned it) const override {
    EdgeColumnUse u = edge_columns()[col];
    u.in_side = it > 0 && col == (it - 1) % 2 ? kRead : kNone;
    u.out_side = col == it % 2 ? kWrite : kNone;
    return u;
  }

  void update(const VertexContext& v, unsigned it) override {
    const std::size_t write_col = it % 2;
    double rank;
    if (it == 0) {
      rank = 1.0 / n_;
    } else {
      const std::size_t read_col = (it - 1) % 2;
      double sum = 0;
      for (const auto& e : v.in_edges()) sum += v.edge_value<double>(read_col, e);
      rank = (1.0 - opts_.damping) / n_ + opts_.damping * scale_ * sum;
    }
    v.set_vertex_value<double>(0, rank);
    const auto out = v.out_edges();
    if (out.empty()) return;
    const double share = rank / static_cast<double>(out.size());
    for (const auto& e : out) v.set_edge_value<double>(write_col, e, share);
  }

  bool after_iteration(unsigned, PswEngine& engine) override {
    double sum = 0;
    engine.for_each_vertex_cell(0, [&](InternalId, std::byte* cell) {
      double x;
      load_cell(cell, 8, &x);
      sum += x;
    });
    engine.for_each_vertex_cell(0, [&](InternalId, std::byte* cell) {
      double x;
      load_cell(cell, 8, &x);
      x /= sum;
      store_cell(cell, 8, &x);
    });
    scale_ = 1.0 / sum;
    return true;
  }

 private:
  PagerankOptions opts_;
  double n_;
  double scale_ = 1.0;
};

}  // namespace

RunStats pagerank_psw(Database& db, const PagerankOptions& opts) {
  PswEngine engine(db);
  PagerankProgram program(opts, db.ids().max_id() + 1);
  return engine.run(program, opts.iterations + 1);
}

VertexValueArray<double> pagerank_edge_centric(Database& db, const PagerankOptions& opts,
                                               RunStats* stats) {
  const IdSpace& ids = db.ids();
  const double n = static_cast<double>(ids.max_id() + 1);
  Database::ExclusiveSession session(db);
  const ColumnSchema col{opts.column, ColumnKind::float64, ColumnTarget::vertex};
  session.ensure_column(col);
  RunStats local;

  VertexValueArray<double> rank(ids.size(), 0.0);
  VertexValueArray<double> acc(ids.size(), 0.0);
  VertexValueArray<std::uint64_t> outdeg(ids.size(), 0);
  {
    const ReadView view = session.view();
    IoStats io;
    edge_sweep(view, TypeFilter::any(), &io, [&](const EdgeTuple& e) { ++outdeg[e.src]; });
    for (InternalId v = 0; v < ids.size(); ++v)
      if (ids.is_vertex(v)) rank[v] = 1.0 / n;
    for (unsigned it = 0; it < opts.iterations; ++it) {
      IoStats sweep_io;
      std::fill(acc.data().begin(), acc.data().end(), 0.0);
      local.edges_visited += edge_sweep(view, TypeFilter::any(), &sweep_io, [&](const EdgeTuple& e) {
        acc[e.dst] += rank[e.src] / static_cast<double>(outdeg[e.src]);
      });
      double sum = 0;
      for (InternalId v = 0; v < ids.size(); ++v) {
        if (!ids.is_vertex(v)) continue;
        rank[v] = (1.0 - opts.damping) / n + opts.damping * acc[v];
        sum += rank[v];
      }
      for (InternalId v = 0; v < ids.size(); ++v)
        if (ids.is_vertex(v)) rank[v] /= sum;
      local.per_iteration.push_back(sweep_io.counters());
      db.io().merge(sweep_io.counters());
      ++local.iterations;
    }
  }
  for (std::uint32_t i = 0; i < ids.partitions(); ++i) {
    std::byte* base = session.vertex_store().interval_cells(col, i, true);
    const VertexInterval iv = ids.interval(i);
    for (InternalId v = iv.lo; v <= iv.hi; ++v) store_cell(base + (v - iv.lo) * 8, 8, &rank[v]);
  }
  if (session.durable()) session.vertex_store().sync_column(col);
  if (stats != nullptr) *stats = std::move(local);
  return rank;
}

// --- connected components ---------------------------------------------------------

namespace {

/// Labels live on the vertex and on every incident edge. Iteration 0
/// seeds each vertex with the smallest original ID among itself and its
/// neighbours; later iterations take the minimum over incident edge labels
/// and push it back. Vertices run in ID order, so labels travel within an
/// iteration.
class ComponentsProgram final : public PswProgram {
 public:
  explicit ComponentsProgram(const std::string& column) : column_(column) {}

  std::vector<EdgeColumnUse> edge_columns() const override {
    return {{{column_ + "_e", ColumnKind::int64, ColumnTarget::edge}, kReadWrite, kReadWrite}};
  }
  std::vector<ColumnSchema> vertex_columns() const override {
    return {{column_, ColumnKind::int64, ColumnTarget::vertex}};
  }

  void update(const VertexContext& v, unsigned it) override {
    std::int64_t label;
    if (it == 0) {
      const IdSpace& ids = *ids_;
      label = static_cast<std::int64_t>(raw(v.original()));
      for (const auto& e : v.in_edges())
        label = std::min(label, static_cast<std::int64_t>(raw(ids.to_original(e.edge.src))));
      for (const auto& e : v.out_edges())
        label = std::min(label, static_cast<std::int64_t>(raw(ids.to_original(e.edge.dst))));
      v.set_vertex_value(0, label);
      for (const auto& e : v.in_edges()) v.set_edge_value(0, e, label);
      for (const auto& e : v.out_edges()) v.set_edge_value(0, e, label);
      ++changed_;
      return;
    }
    const std::int64_t old = v.vertex_value<std::int64_t>(0);
    label = old;
    for (const auto& e : v.in_edges()) label = std::min(label, v.edge_value<std::int64_t>(0, e));
    for (const auto& e : v.out_edges()) label = std::min(label, v.edge_value<std::int64_t>(0, e));
    if (label != old) {
      v.set_vertex_value(0, label);
      ++changed_;
    }
    const auto push = [&](const EdgeRef& e) {
      if (v.edge_value<std::int64_t>(0, e) > label) {
        v.set_edge_value(0, e, label);
        ++changed_;
      }
    };
    for (const auto& e : v.in_edges()) push(e);
    for (const auto& e : v.out_edges()) push(e);
  }

  void before_iteration(unsigned) override { changed_ = 0; }
  bool after_iteration(unsigned it, PswEngine&) override { return it == 0 || changed_ > 0; }
  void bind(const IdSpace& ids) { ids_ = &ids; }

 private:
  std::string column_;
  const IdSpace* ids_ = nullptr;
  std::uint64_t changed_ = 0;
};

}  // namespace

RunStats connected_components(Database& db, const std::string& column, unsigned max_iterations) {
  PswEngine engine(db);
  ComponentsProgram program(column);
  program.bind(db.ids());
  return engine.run(program, max_iterations);
}

}  // namespace palgraph::compute
