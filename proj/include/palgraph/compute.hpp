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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "palgraph/database.hpp"

namespace palgraph::compute {

/// How a program touches an edge column on each side of the vertex.
enum Access : std::uint8_t { kNone = 0, kRead = 1, kWrite = 2, kReadWrite = 3 };

struct EdgeColumnUse {
  ColumnSchema column;
  std::uint8_t in_side = kNone;
  std::uint8_t out_side = kNone;
};

/// An incident edge as seen by an update function. `part` indexes the
/// run's partition table; `pos` is the edge-array position.
struct EdgeRef {
  EdgeTuple edge;
  std::uint32_t part = 0;
  std::uint64_t pos = 0;
};

class PswEngine;

/// The vertex being updated, its in- and out-edges and value accessors.
/// Column arguments index the program's declared column lists.
class VertexContext {
 public:
  InternalId id() const noexcept { return id_; }
  OriginalId original() const;
  std::span<const EdgeRef> in_edges() const noexcept { return in_; }
  std::span<const EdgeRef> out_edges() const noexcept { return out_; }

  template <typename T>
  T edge_value(std::size_t col, const EdgeRef& e) const {
    T v;
    load_cell(cell(col, e), sizeof(T), &v);
    return v;
  }
  template <typename T>
  void set_edge_value(std::size_t col, const EdgeRef& e, T v) const {
    store_cell(cell(col, e), sizeof(T), &v);
  }
  template <typename T>
  T vertex_value(std::size_t col) const {
    T v;
    load_cell(vertex_cell(col), sizeof(T), &v);
    return v;
  }
  template <typename T>
  void set_vertex_value(std::size_t col, T v) const {
    store_cell(vertex_cell(col), sizeof(T), &v);
  }

 private:
  friend class PswEngine;
  std::byte* cell(std::size_t col, const EdgeRef& e) const;
  std::byte* vertex_cell(std::size_t col) const;

  const PswEngine* engine_ = nullptr;
  InternalId id_ = 0;
  std::uint64_t offset_ = 0;  // within the interval
  std::span<const EdgeRef> in_;
  std::span<const EdgeRef> out_;
};

/// Vertex-centric program in the update-function model. update() may only
/// touch the given vertex and its incident edges.
class PswProgram {
 public:
  virtual ~PswProgram() = default;
  virtual std::vector<EdgeColumnUse> edge_columns() const { return {}; }
  virtual std::vector<ColumnSchema> vertex_columns() const { return {}; }
  /// True if update() never reads a value another vertex of the same
  /// iteration writes; vertices of an interval may then run in parallel.
  virtual bool independent() const { return false; }
  virtual TypeFilter filter() const { return TypeFilter::any(); }
  /// Per-iteration access of declared edge column `col`; defaults to the
  /// declared sides. Only I/O accounting depends on it.
  virtual EdgeColumnUse access(std::size_t col, unsigned /*iteration*/) const {
    return edge_columns()[col];
  }

  virtual void before_iteration(unsigned /*iteration*/) {}
  virtual void update(const VertexContext& v, unsigned iteration) = 0;
  /// Returns false to stop before the iteration limit.
  virtual bool after_iteration(unsigned /*iteration*/, PswEngine& /*engine*/) { return true; }
};

struct RunStats {
  unsigned iterations = 0;
  std::vector<IoCounters> per_iteration;
  std::uint64_t vertex_updates = 0;
  std::uint64_t edges_visited = 0;  ///< incident-edge slots handed to updates
};

/// Parallel Sliding Windows over every partition of every level. For vertex
/// interval i the in-edges come from the owner partitions covering i, held
/// in memory from their first owned interval to their last; the out-edges
/// come from one window per partition that slides forward through the
/// source-sorted edge array. Buffers are flushed first.
class PswEngine {
 public:
  explicit PswEngine(Database& db);
  ~PswEngine();
  PswEngine(const PswEngine&) = delete;
  PswEngine& operator=(const PswEngine&) = delete;

  RunStats run(PswProgram& program, unsigned iterations);

  const IdSpace& ids() const noexcept;
  /// Visits each vertex's cells of a declared vertex column, interval by
  /// interval; for whole-graph rescaling between iterations.
  void for_each_vertex_cell(std::size_t col, const std::function<void(InternalId, std::byte*)>& fn);

 private:
  friend class VertexContext;
  struct State;
  std::unique_ptr<State> st_;
};

/// One value per internal ID, in memory.
template <typename T>
class VertexValueArray {
 public:
  VertexValueArray() = default;
  VertexValueArray(std::uint64_t size, T init) : values_(size, init) {}
  std::uint64_t size() const noexcept { return values_.size(); }
  T& operator[](InternalId v) { return values_[v]; }
  const T& operator[](InternalId v) const { return values_[v]; }
  std::vector<T>& data() noexcept { return values_; }

 private:
  std::vector<T> values_;
};

/// Streams every live edge once in partition order (buffers first, then
/// level by level). Returns the number of edges visited.
std::uint64_t edge_sweep(const ReadView& view, TypeFilter filter, IoStats* stats,
                         const std::function<void(const EdgeTuple&)>& fn);

struct PagerankOptions {
  double damping = 0.85;
  unsigned iterations = 20;
  std::string column = "pagerank";
};

/// Damped Pagerank, rescaled to sum to 1 after every iteration. Results in
/// the float64 vertex column `column`.
RunStats pagerank_psw(Database& db, const PagerankOptions& opts = {});
/// The same iteration in the edge-centric model; also writes `column`.
VertexValueArray<double> pagerank_edge_centric(Database& db, const PagerankOptions& opts = {},
                                               RunStats* stats = nullptr);

/// Label propagation over the undirected view until no label changes. Each
/// vertex ends labelled with the minimum original ID of its component, in
/// the int64 vertex column `column`.
RunStats connected_components(Database& db, const std::string& column = "component",
                              unsigned max_iterations = 1000);

}  // namespace palgraph::compute
