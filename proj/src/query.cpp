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

#include "palgraph/query.hpp"

#include <algorithm>

namespace palgraph::query {

namespace {

void top_down(const ReadView& view, const Frontier& frontier, Direction dir, TypeFilter filter,
              IoStats* io, Frontier& next) {
  const Database& db = view.db();
  const LsmShape& shape = db.shape();
  const Snapshot& snap = view.snapshot();
  const std::vector<InternalId> vs = frontier.to_vector();

  std::vector<EdgeRecord> hits;
  for (auto v : vs) {
    hits.clear();
    if (dir == Direction::out)
      view.buffered_out_edges(v, filter, hits);
    else
      view.buffered_in_edges(v, filter, hits);
    for (const auto& h : hits) next.insert(dir == Direction::out ? h.edge.dst : h.edge.src);
  }

  // Partition-major: each partition sees the frontier in ID order.
  std::vector<PartitionEdge> found;
  for (std::uint32_t level = 1; level <= shape.depth(); ++level) {
    for (std::uint32_t k = 0; k < shape.count(level); ++k) {
      const auto& p = snap.at(level, k);
      if (!p) continue;
      if (dir == Direction::out) {
        for (auto v : vs) {
          found.clear();
          p->out_edges(v, filter, io, found);
          for (const auto& e : found) next.insert(e.edge.dst);
        }
      } else {
        const InternalId lo = p->info().lo, hi = p->info().hi;
        auto it = std::lower_bound(vs.begin(), vs.end(), lo);
        for (; it != vs.end() && *it <= hi; ++it) {
          found.clear();
          p->in_edges(*it, filter, io, found);
          for (const auto& e : found) next.insert(e.edge.src);
        }
      }
    }
  }
}

void bottom_up(const ReadView& view, const Frontier& frontier, Direction dir, TypeFilter filter,
               IoStats* io, Frontier& next) {
  const Database& db = view.db();
  const LsmShape& shape = db.shape();
  const auto visit = [&](const EdgeTuple& e) {
    if (dir == Direction::out) {
      if (frontier.contains(e.src)) next.insert(e.dst);
    } else if (frontier.contains(e.dst)) {
      next.insert(e.src);
    }
  };
  view.scan_buffers(filter, [&](const EdgeRecord& r) { visit(r.edge); });
  for (std::uint32_t level = 1; level <= shape.depth(); ++level)
    for (std::uint32_t k = 0; k < shape.count(level); ++k)
      if (const auto& p = view.snapshot().at(level, k))
        p->scan(filter, io, [&](std::uint64_t, const EdgeTuple& e) { visit(e); });
}

}  // namespace

Strategy choose_strategy(const ReadView& view, const Frontier& frontier) {
  const double vertices = static_cast<double>(view.db().ids().max_id()) + 1.0;
  return static_cast<double>(frontier.size()) > view.db().options().bottom_up_ratio * vertices
             ? Strategy::bottom_up
             : Strategy::top_down;
}

Frontier traverse(const ReadView& view, const Frontier& frontier, Direction dir, TypeFilter filter,
                  Strategy strategy, IoStats* stats) {
  const IdSpace& ids = view.db().ids();
  Frontier next(ids.size());
  if (frontier.empty()) return next;
  if (strategy == Strategy::automatic) strategy = choose_strategy(view, frontier);
  IoStats local;
  if (strategy == Strategy::top_down)
    top_down(view, frontier, dir, filter, &local, next);
  else
    bottom_up(view, frontier, dir, filter, &local, next);
  const IoCounters c = local.counters();
  if (stats != nullptr) stats->merge(c);
  view.db().io().merge(c);
  return next;
}

Frontier friends_of_friends(const ReadView& view, InternalId u, std::uint64_t fanout_cap,
                            TypeFilter filter, IoStats* stats) {
  const std::uint64_t n = view.db().ids().size();
  const Frontier start = Frontier::of(n, std::vector<InternalId>{u});
  const Frontier friends = traverse_out(view, start, filter, Strategy::automatic, stats);
  Frontier capped(n);
  std::uint64_t taken = 0;
  friends.for_each([&](InternalId v) {
    if (taken < fanout_cap) {
      capped.insert(v);
      ++taken;
    }
  });
  const Frontier two_hop = traverse_out(view, capped, filter, Strategy::automatic, stats);
  Frontier out(n);
  two_hop.for_each([&](InternalId v) {
    if (v != u && !friends.contains(v)) out.insert(v);
  });
  return out;
}

std::optional<unsigned> shortest_path(const ReadView& view, InternalId a, InternalId b,
                                      unsigned max_hops, TypeFilter filter, IoStats* stats) {
  const IdSpace& ids = view.db().ids();
  if (a >= ids.size() || b >= ids.size()) throw Error(Errc::out_of_range, "shortest_path: vertex out of range");
  if (a == b) return 0u;
  const std::uint64_t n = ids.size();
  Frontier fwd = Frontier::of(n, std::vector<InternalId>{a});
  Frontier bwd = Frontier::of(n, std::vector<InternalId>{b});
  Frontier seen_fwd = fwd, seen_bwd = bwd;
  // No path of length <= hops exists at the top of each iteration.
  for (unsigned hops = 1; hops <= max_hops; ++hops) {
    const bool forward = fwd.size() <= bwd.size();
    Frontier& front = forward ? fwd : bwd;
    Frontier& seen = forward ? seen_fwd : seen_bwd;
    const Frontier& other = forward ? seen_bwd : seen_fwd;
    Frontier next = traverse(view, front, forward ? Direction::out : Direction::in, filter,
                             Strategy::automatic, stats)
                        .minus(seen);
    if (next.intersects(other)) return hops;
    if (next.empty()) return std::nullopt;
    seen.merge(next);
    front = std::move(next);
  }
  return std::nullopt;
}

std::vector<OriginalId> to_original(const Database& db, const Frontier& f) {
  std::vector<OriginalId> out;
  out.reserve(f.size());
  f.for_each([&](InternalId v) { out.push_back(db.ids().to_original(v)); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<OriginalId> friends_of_friends(const Database& db, OriginalId u,
                                           std::uint64_t fanout_cap, TypeFilter filter) {
  const ReadView view = db.read_view();
  return to_original(db, friends_of_friends(view, db.ids().to_internal(u), fanout_cap, filter));
}

std::optional<unsigned> shortest_path(const Database& db, OriginalId a, OriginalId b,
                                      unsigned max_hops, TypeFilter filter) {
  const ReadView view = db.read_view();
  return shortest_path(view, db.ids().to_internal(a), db.ids().to_internal(b), max_hops, filter);
}

}  // namespace palgraph::query
