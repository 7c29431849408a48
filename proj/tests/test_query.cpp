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


#include <gtest/gtest.h>

#include <atomic>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

#include "palgraph/graphgen.hpp"
#include "palgraph/query.hpp"
#include "test_support.hpp"

namespace palgraph {
namespace {

using testing::small_config;
using testing::TempDir;

OriginalId O(std::uint64_t v) { return OriginalId{v}; }

struct Adjacency {
  std::map<std::uint64_t, std::set<std::uint64_t>> out, in;
  void add(std::uint64_t s, std::uint64_t d) {
    out[s].insert(d);
    in[d].insert(s);
  }
  const std::set<std::uint64_t>& of(const std::map<std::uint64_t, std::set<std::uint64_t>>& m,
                                    std::uint64_t v) const {
    static const std::set<std::uint64_t> empty;
    auto it = m.find(v);
    return it == m.end() ? empty : it->second;
  }
};

struct Loaded {
  TempDir dir{"q"};
  std::unique_ptr<Database> db;
  Adjacency adj;
};

// Leaves part of the graph in the buffers so queries cover both places.
std::unique_ptr<Loaded> load(std::uint64_t vertices, std::uint64_t edges, std::uint64_t seed,
                             std::uint32_t partitions = 16) {
  auto l = std::make_unique<Loaded>();
  l->db = Database::create(l->dir / "db", small_config(vertices - 1, partitions, 5000, 20'000),
                           testing::fast_options());
  for (const auto& e : power_law_graph(vertices, edges, seed)) {
    l->db->insert_edge(O(e.src), O(e.dst), e.type);
    l->adj.add(e.src, e.dst);
  }
  return l;
}

std::set<std::uint64_t> originals(const Database& db, const Frontier& f) {
  std::set<std::uint64_t> out;
  for (auto v : query::to_original(db, f)) out.insert(raw(v));
  return out;
}

Frontier frontier_of(const Database& db, const std::vector<std::uint64_t>& orig) {
  Frontier f(db.ids().size());
  for (auto o : orig) f.insert(db.ids().to_internal(O(o)));
  return f;
}

TEST(Frontier, SparseDenseSwitchAndSetOps) {
  Frontier f(64 * 100);
  for (InternalId v : {5u, 3u, 5u, 99u}) f.insert(v);
  EXPECT_FALSE(f.dense());
  EXPECT_EQ(f.size(), 3u);
  EXPECT_TRUE(f.contains(3));
  EXPECT_FALSE(f.contains(4));
  EXPECT_FALSE(f.contains(1'000'000));
  for (InternalId v = 0; v < 200; v += 2) f.insert(v);
  EXPECT_TRUE(f.dense());
  EXPECT_EQ(f.size(), 103u);  // 100 evens below 200 plus 3, 5, 99
  Frontier g = Frontier::of(64 * 100, std::vector<InternalId>{3, 4, 5000});
  const Frontier d = g.minus(f);
  EXPECT_EQ(d.to_vector(), (std::vector<InternalId>{5000}));
  EXPECT_TRUE(g.intersects(f));
  EXPECT_FALSE(d.intersects(f));
  g.merge(f);
  EXPECT_EQ(g.size(), 104u);
  EXPECT_THROW(f.insert(64 * 100), Error);
  std::vector<InternalId> seen;
  f.for_each([&](InternalId v) { seen.push_back(v); });
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  EXPECT_EQ(f, Frontier::of(64 * 100, seen));
}

TEST(Traverse, ThreeEdgeGraph) {
  TempDir dir("qt3");
  auto db = Database::create(dir / "db", small_config(9, 1), testing::fast_options());
  db->insert_edge(O(1), O(2), 0);
  db->insert_edge(O(1), O(3), 0);
  db->insert_edge(O(2), O(3), 0);
  const auto check = [&] {
    auto view = db->read_view();
    for (auto st : {query::Strategy::top_down, query::Strategy::bottom_up}) {
      EXPECT_EQ(originals(*db, query::traverse_out(view, frontier_of(*db, {1}), TypeFilter::any(), st)),
                (std::set<std::uint64_t>{2, 3}));
      EXPECT_EQ(originals(*db, query::traverse_in(view, frontier_of(*db, {3}), TypeFilter::any(), st)),
                (std::set<std::uint64_t>{1, 2}));
      EXPECT_TRUE(query::traverse_out(view, frontier_of(*db, {}), TypeFilter::any(), st).empty());
    }
  };
  check();
  db->flush();
  check();
}

TEST(Traverse, StrategiesAgreeOnRandomFrontiers) {
  auto l = load(3000, 20'000, 1);
  const Database& db = *l->db;
  auto view = db.read_view();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10'000; ++i) {
    const std::size_t n = i % 10 == 0 ? rng() % 1500 : rng() % 12;
    std::vector<std::uint64_t> orig;
    for (std::size_t k = 0; k < n; ++k) orig.push_back(rng() % 3000);
    const Frontier f = frontier_of(db, orig);
    const auto dir = i % 2 ? query::Direction::out : query::Direction::in;
    const Frontier td = query::traverse(view, f, dir, TypeFilter::any(), query::Strategy::top_down);
    const Frontier bu = query::traverse(view, f, dir, TypeFilter::any(), query::Strategy::bottom_up);
    ASSERT_EQ(td, bu) << i;
    if (i % 100 == 0) {
      std::set<std::uint64_t> expected;
      for (auto o : orig) {
        const auto& nb = l->adj.of(dir == query::Direction::out ? l->adj.out : l->adj.in, o);
        expected.insert(nb.begin(), nb.end());
      }
      ASSERT_EQ(originals(db, td), expected);
    }
  }
}

TEST(Traverse, AutomaticSwitchesAtThreshold) {
  auto l = load(2000, 5000, 3);
  auto view = l->db->read_view();
  std::vector<std::uint64_t> small(50), big(200);
  for (std::uint64_t i = 0; i < 50; ++i) small[i] = i;
  for (std::uint64_t i = 0; i < 200; ++i) big[i] = i;  // 200 > 2000 / 20
  EXPECT_EQ(query::choose_strategy(view, frontier_of(*l->db, small)), query::Strategy::top_down);
  EXPECT_EQ(query::choose_strategy(view, frontier_of(*l->db, big)), query::Strategy::bottom_up);
}

std::set<std::uint64_t> brute_fof(const Database& db, const Adjacency& adj, std::uint64_t u,
                                  std::uint64_t cap) {
  const auto& friends = adj.of(adj.out, u);
  std::vector<std::pair<InternalId, std::uint64_t>> by_internal;
  for (auto f : friends) by_internal.push_back({db.ids().to_internal(O(f)), f});
  std::sort(by_internal.begin(), by_internal.end());
  if (by_internal.size() > cap) by_internal.resize(cap);
  std::set<std::uint64_t> out;
  for (const auto& [iv, f] : by_internal)
    for (auto w : adj.of(adj.out, f))
      if (w != u && !friends.count(w)) out.insert(w);
  return out;
}

std::set<std::uint64_t> as_set(const std::vector<OriginalId>& v) {
  std::set<std::uint64_t> s;
  for (auto x : v) s.insert(raw(x));
  return s;
}

TEST(FriendsOfFriends, SmallExamples) {
  TempDir dir("qfof");
  auto db = Database::create(dir / "db", small_config(19, 2), testing::fast_options());
  db->insert_edge(O(1), O(2), 0);
  db->insert_edge(O(2), O(3), 0);
  EXPECT_EQ(as_set(query::friends_of_friends(*db, O(1))), (std::set<std::uint64_t>{3}));
  db->insert_edge(O(3), O(1), 0);
  db->insert_edge(O(1), O(3), 0);
  EXPECT_TRUE(query::friends_of_friends(*db, O(1)).empty());
  EXPECT_TRUE(query::friends_of_friends(*db, O(7)).empty());
  EXPECT_TRUE(query::friends_of_friends(*db, O(1), 0).empty());
}

TEST(FriendsOfFriends, MatchesBruteForce) {
  auto l = load(20'000, 100'000, 4);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    // Half the probes hit high-degree vertices so the cap matters.
    const std::uint64_t u = i % 2 ? rng() % 20'000 : l->adj.out.begin()->first + rng() % 200;
    const std::uint64_t cap = i % 3 == 0 ? 5 : query::kDefaultFanoutCap;
    ASSERT_EQ(as_set(query::friends_of_friends(*l->db, O(u), cap)), brute_fof(*l->db, l->adj, u, cap))
        << u;
  }
}

std::optional<unsigned> bfs(const Adjacency& adj, std::uint64_t a, std::uint64_t b, unsigned max) {
  if (a == b) return 0u;
  std::unordered_map<std::uint64_t, unsigned> dist{{a, 0}};
  std::deque<std::uint64_t> q{a};
  while (!q.empty()) {
    const auto v = q.front();
    q.pop_front();
    if (dist[v] == max) continue;
    for (auto w : adj.of(adj.out, v)) {
      if (dist.count(w)) continue;
      dist[w] = dist[v] + 1;
      if (w == b) return dist[w];
      q.push_back(w);
    }
  }
  return std::nullopt;
}

TEST(ShortestPath, SmallExamples) {
  TempDir dir("qsp");
  auto db = Database::create(dir / "db", small_config(19, 2), testing::fast_options());
  db->insert_edge(O(1), O(2), 0);
  db->insert_edge(O(2), O(3), 0);
  EXPECT_EQ(query::shortest_path(*db, O(1), O(3)), 2u);
  EXPECT_EQ(query::shortest_path(*db, O(3), O(1)), std::nullopt);
  EXPECT_EQ(query::shortest_path(*db, O(4), O(4)), 0u);
  EXPECT_EQ(query::shortest_path(*db, O(1), O(3), 1), std::nullopt);
  EXPECT_EQ(query::shortest_path(*db, O(1), O(2), 0), std::nullopt);
}

TEST(ShortestPath, MatchesBfsOracle) {
  auto l = load(50'000, 100'000, 6);
  std::mt19937_64 rng(7);
  int found = 0;
  for (int i = 0; i < 1000; ++i) {
    // Most targets come from a short random walk so that paths exist.
    const std::uint64_t a = rng() % 50'000;
    std::uint64_t b = rng() % 50'000;
    if (i % 4 != 0) {
      b = a;
      for (unsigned step = 1 + rng() % 6; step > 0; --step) {
        const auto& nb = l->adj.of(l->adj.out, b);
        if (nb.empty()) break;
        b = *std::next(nb.begin(), static_cast<long>(rng() % nb.size()));
      }
    }
    const auto want = bfs(l->adj, a, b, query::kDefaultMaxHops);
    ASSERT_EQ(query::shortest_path(*l->db, O(a), O(b)), want) << a << " -> " << b;
    found += want.has_value();
  }
  EXPECT_GT(found, 300);  // the sample must exercise real paths
}

TEST(OutEdges, SeekBoundOverRandomVertices) {
  auto l = load(20'000, 100'000, 8);
  l->db->flush();
  const auto& shape = l->db->shape();
  const std::uint64_t sum_p = shape.total_partitions();
  const std::uint64_t per_block = l->db->config().block_size / 8;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t u = rng() % 20'000;
    IoStats io;
    const auto out = l->db->out_edges(O(u), TypeFilter::any(), &io);
    const auto c = io.counters();
    const std::uint64_t deg = out.size();
    EXPECT_LE(c.random_seeks, std::min(2 * sum_p, deg));
    // A partition's range may straddle one block boundary more than its
    // length suggests.
    EXPECT_LE(c.sequential_blocks, deg / per_block + c.random_seeks + (deg % per_block != 0));
  }
}

TEST(Queries, DegreeIdentityAndBoundaries) {
  auto l = load(4000, 30'000, 10);
  const Database& db = *l->db;
  std::uint64_t out_sum = 0, in_sum = 0;
  for (std::uint64_t v = 0; v < 4000; ++v) {
    out_sum += db.out_edges(O(v)).size();
    in_sum += db.in_edges(O(v)).size();
  }
  EXPECT_EQ(out_sum, 30'000u);
  EXPECT_EQ(in_sum, 30'000u);
  // Interval ends resolve to the right owner partitions.
  for (std::uint32_t k = 0; k < db.ids().partitions(); ++k) {
    const auto iv = db.ids().interval(k);
    for (InternalId v : {iv.lo, iv.hi}) {
      if (!db.ids().is_vertex(v)) continue;
      const std::uint64_t o = raw(db.ids().to_original(v));
      std::multiset<std::uint64_t> want;
      for (auto s : l->adj.of(l->adj.in, o)) want.insert(s);
      std::multiset<std::uint64_t> got;
      for (const auto& e : db.in_edges(O(o))) got.insert(raw(e.src));
      std::set<std::uint64_t> got_unique(got.begin(), got.end());
      EXPECT_EQ(std::set<std::uint64_t>(want.begin(), want.end()), got_unique) << o;
    }
  }
}

TEST(Queries, SnapshotSoundUnderConcurrentFlushes) {
  TempDir dir("qsnap");
  auto db = Database::create(dir / "db", small_config(9999, 16, 300, 1500), testing::fast_options());
  // Fixed neighbourhoods for vertex 0; the writer never touches vertex 0.
  for (std::uint64_t s = 1; s <= 60; ++s) db->insert_edge(O(s), O(0), 0);
  for (std::uint64_t d = 1; d <= 40; ++d) db->insert_edge(O(0), O(d), 0);
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> bad{0}, reads{0};
  std::thread reader([&] {
    while (!done.load()) {
      if (db->in_edges(O(0)).size() != 60) bad.fetch_add(1);
      if (db->out_edges(O(0)).size() != 40) bad.fetch_add(1);
      reads.fetch_add(1);
    }
  });
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20'000; ++i) db->insert_edge(O(1 + rng() % 9999), O(1 + rng() % 9999), 0);
  done = true;
  reader.join();
  EXPECT_GT(db->stats().flushes, 10u);
  EXPECT_GT(reads.load(), 0u);
  EXPECT_EQ(bad.load(), 0u);
}

}  // namespace
}  // namespace palgraph
