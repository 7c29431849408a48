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

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "palgraph/partition.hpp"
#include "test_support.hpp"

namespace palgraph {
namespace {

using testing::TempDir;

EdgeRun make_run(std::vector<EdgeTuple> edges, const Schema& schema) {
  std::stable_sort(edges.begin(), edges.end(), [](const EdgeTuple& a, const EdgeTuple& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  EdgeRun run;
  run.row_width = schema.row_width();
  const auto null_row = schema.null_row();
  for (const auto& e : edges) run.push(e, null_row);
  return run;
}

DbConfig part_config(std::uint64_t max_id, IndexKind kind = IndexKind::gamma) {
  DbConfig cfg;
  cfg.max_id = max_id;
  cfg.partitions = 1;
  cfg.out_index = kind;
  return cfg;
}

std::shared_ptr<EdgePartition> build(const TempDir& dir, const std::vector<EdgeTuple>& edges,
                                     const DbConfig& cfg, std::uint64_t uid = 1,
                                     const Schema& schema = Schema{}) {
  PartitionInfo info{1, 0, uid, 0, cfg.id_space() - 1};
  return EdgePartition::build(dir.path(), info, make_run(edges, schema), schema, cfg, {false, nullptr});
}

std::vector<EdgeTuple> tuples(const std::vector<PartitionEdge>& v) {
  std::vector<EdgeTuple> out;
  for (const auto& e : v) out.push_back(e.edge);
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<EdgeTuple> kThree{{1, 2, 0}, {1, 3, 0}, {2, 3, 0}};

TEST(Partition, ThreeEdgeLayoutAndChains) {
  TempDir dir("p3");
  auto p = build(dir, kThree, part_config(9));
  ASSERT_EQ(p->edge_count(), 3u);
  EXPECT_EQ(entry::dst(p->word(0)), 2u);
  EXPECT_EQ(entry::next(p->word(0)), kChainStop);
  EXPECT_EQ(entry::dst(p->word(1)), 3u);
  EXPECT_EQ(entry::next(p->word(1)), 1u);  // 1 -> 2
  EXPECT_EQ(entry::dst(p->word(2)), 3u);
  EXPECT_EQ(entry::next(p->word(2)), kChainStop);

  const auto in3 = p->in_index().find(3, p->edge_count(), nullptr);
  ASSERT_TRUE(in3);
  EXPECT_EQ(in3->first, 1u);
  EXPECT_EQ(p->in_index().find(2, p->edge_count(), nullptr)->first, 0u);

  std::vector<PartitionEdge> out;
  p->out_edges(1, TypeFilter::any(), nullptr, out);
  EXPECT_EQ(tuples(out), (std::vector<EdgeTuple>{{1, 2, 0}, {1, 3, 0}}));
  out.clear();
  p->in_edges(3, TypeFilter::any(), nullptr, out);
  EXPECT_EQ(tuples(out), (std::vector<EdgeTuple>{{1, 3, 0}, {2, 3, 0}}));
  EXPECT_EQ(p->edge_at(2, nullptr), (EdgeTuple{2, 3, 0}));
  EXPECT_EQ(p->edge_at(0, nullptr), (EdgeTuple{1, 2, 0}));
  EXPECT_THROW(p->edge_at(3, nullptr), Error);

  out.clear();
  p->out_edges(4, TypeFilter::any(), nullptr, out);
  p->in_edges(1, TypeFilter::any(), nullptr, out);
  EXPECT_TRUE(out.empty());
}

TEST(Partition, EmptyAndSelfLoop) {
  TempDir dir("pe");
  auto empty = build(dir, {}, part_config(9), 1);
  EXPECT_EQ(empty->edge_count(), 0u);
  std::vector<PartitionEdge> out;
  empty->out_edges(1, TypeFilter::any(), nullptr, out);
  empty->in_edges(1, TypeFilter::any(), nullptr, out);
  EXPECT_TRUE(out.empty());

  auto loop = build(dir, {{4, 4, 2}}, part_config(9), 2);
  loop->out_edges(4, TypeFilter::any(), nullptr, out);
  loop->in_edges(4, TypeFilter::any(), nullptr, out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].edge, (EdgeTuple{4, 4, 2}));
  EXPECT_EQ(out[1].edge, (EdgeTuple{4, 4, 2}));
}

TEST(Partition, ReopenMatches) {
  TempDir dir("pr");
  const auto cfg = part_config(9);
  auto p = build(dir, kThree, cfg);
  auto q = EdgePartition::open(dir.path(), p->info(), cfg);
  EXPECT_EQ(q->edge_count(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(q->word(i), p->word(i));
  PartitionInfo wrong = p->info();
  wrong.level = 2;
  EXPECT_THROW(EdgePartition::open(dir.path(), wrong, cfg), Error);
}

TEST(Partition, RejectsBadRuns) {
  TempDir dir("pb");
  const auto cfg = part_config(9);
  Schema schema;
  EdgeRun unsorted;
  unsorted.push({2, 1, 0}, {});
  unsorted.push({1, 1, 0}, {});
  EXPECT_THROW(EdgePartition::build(dir.path(), {1, 0, 1, 0, 9}, unsorted, schema, cfg, {false, nullptr}),
               Error);
  EdgeRun outside;
  outside.push({1, 5, 0}, {});
  EXPECT_THROW(EdgePartition::build(dir.path(), {2, 0, 2, 0, 3}, outside, schema, cfg, {false, nullptr}),
               Error);
}

struct RandomGraph {
  std::vector<EdgeTuple> edges;
  std::multimap<InternalId, EdgeTuple> by_src, by_dst;
};

RandomGraph random_graph(std::size_t n, InternalId vertices, std::uint64_t seed) {
  RandomGraph g;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    // Skewed so that some chains are long and cross many blocks.
    const InternalId s = rng() % 2 ? rng() % 50 : rng() % vertices;
    const InternalId d = rng() % 3 ? rng() % vertices : rng() % 20;
    const EdgeTuple e{s, d, static_cast<std::uint8_t>(rng() % 3)};
    g.edges.push_back(e);
    g.by_src.insert({s, e});
    g.by_dst.insert({d, e});
  }
  return g;
}

std::vector<EdgeTuple> oracle(const std::multimap<InternalId, EdgeTuple>& m, InternalId v) {
  std::vector<EdgeTuple> out;
  auto [a, b] = m.equal_range(v);
  for (; a != b; ++a) out.push_back(a->second);
  std::sort(out.begin(), out.end());
  return out;
}

class PartitionOracle : public ::testing::TestWithParam<IndexKind> {};

TEST_P(PartitionOracle, RandomGraphMatchesMultimap) {
  TempDir dir("po");
  const InternalId vertices = 20'000;
  const auto g = random_graph(100'000, vertices, 42);
  auto p = build(dir, g.edges, part_config(vertices - 1, GetParam()));
  std::vector<PartitionEdge> got;
  for (InternalId v = 0; v < vertices; ++v) {
    got.clear();
    p->in_edges(v, TypeFilter::any(), nullptr, got);
    ASSERT_EQ(tuples(got), oracle(g.by_dst, v)) << "in " << v;
    got.clear();
    p->out_edges(v, TypeFilter::any(), nullptr, got);
    ASSERT_EQ(tuples(got), oracle(g.by_src, v)) << "out " << v;
  }
  // Out-edges are a contiguous position range, in-chains only move forward.
  for (InternalId v = 0; v < 200; ++v) {
    got.clear();
    p->out_edges(v, TypeFilter::any(), nullptr, got);
    for (std::size_t i = 1; i < got.size(); ++i) ASSERT_EQ(got[i].pos, got[i - 1].pos + 1);
    got.clear();
    p->in_edges(v, TypeFilter::any(), nullptr, got);
    for (std::size_t i = 1; i < got.size(); ++i) ASSERT_GT(got[i].pos, got[i - 1].pos);
  }
  // Reverse lookup.
  std::mt19937_64 rng(5);
  auto sorted = make_run(g.edges, Schema{});
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t pos = rng() % p->edge_count();
    ASSERT_EQ(p->edge_at(pos, nullptr), sorted.edges[pos]);
  }
}

INSTANTIATE_TEST_SUITE_P(IndexKinds, PartitionOracle,
                         ::testing::Values(IndexKind::gamma, IndexKind::sparse, IndexKind::binary));

TEST(Partition, TypeFilterSelectsTypes) {
  TempDir dir("pt");
  auto p = build(dir, {{1, 2, 0}, {1, 3, 1}, {1, 4, 2}, {5, 3, 1}}, part_config(9));
  std::vector<PartitionEdge> got;
  p->out_edges(1, TypeFilter::only(1), nullptr, got);
  EXPECT_EQ(tuples(got), (std::vector<EdgeTuple>{{1, 3, 1}}));
  got.clear();
  p->in_edges(3, TypeFilter::only(1), nullptr, got);
  EXPECT_EQ(tuples(got), (std::vector<EdgeTuple>{{1, 3, 1}, {5, 3, 1}}));
  got.clear();
  p->out_edges(1, TypeFilter::none().allow(0).allow(2), nullptr, got);
  EXPECT_EQ(tuples(got), (std::vector<EdgeTuple>{{1, 2, 0}, {1, 4, 2}}));
}

TEST(Partition, SetTypeAndTombstones) {
  TempDir dir("ps");
  auto p = build(dir, kThree, part_config(9));
  EXPECT_EQ(p->set_type(1, 4, false), 0u);
  EXPECT_EQ(p->edge_at(1, nullptr), (EdgeTuple{1, 3, 4}));
  // The chain survives type changes.
  EXPECT_EQ(entry::next(p->word(1)), 1u);
  p->set_type(1, kTombstoneType, false);
  std::vector<PartitionEdge> got;
  p->in_edges(3, TypeFilter::any(), nullptr, got);
  EXPECT_EQ(tuples(got), (std::vector<EdgeTuple>{{2, 3, 0}}));
  EXPECT_EQ(p->load_run(Schema{}, true, nullptr).size(), 2u);
  EXPECT_EQ(p->load_run(Schema{}, false, nullptr).size(), 3u);
}

TEST(Partition, ConcurrentSetTypeNeverTears) {
  TempDir dir("pc");
  auto p = build(dir, kThree, part_config(9));
  const std::uint64_t a = entry::with_type(p->word(1), 3);
  const std::uint64_t b = entry::with_type(p->word(1), 12);
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> bad{0}, reads{0};
  std::thread reader([&] {
    while (!stop.load()) {
      const std::uint64_t w = p->word(1);
      if (w != a && w != b && entry::type(w) != 0) bad.fetch_add(1);
      reads.fetch_add(1);
    }
  });
  // One core: let the reader start before the writes run out.
  while (reads.load() == 0) std::this_thread::yield();
  for (int i = 0; i < 200'000; ++i) p->set_type(1, i % 2 ? 3 : 12, false);
  stop = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0u);
  EXPECT_GT(reads.load(), 0u);
}

TEST(Partition, SeekBounds) {
  TempDir dir("pio");
  const InternalId vertices = 5'000;
  const auto g = random_graph(100'000, vertices, 9);
  auto p = build(dir, g.edges, part_config(vertices - 1));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const InternalId v = rng() % vertices;
    IoStats out_io, in_io;
    std::vector<PartitionEdge> got;
    p->out_edges(v, TypeFilter::any(), &out_io, got);
    const auto oc = out_io.counters();
    const std::uint64_t outdeg = got.size();
    EXPECT_LE(oc.random_seeks, std::min<std::uint64_t>(1, outdeg));
    EXPECT_LE(oc.sequential_blocks, outdeg * 8 / 4096 + 2);
    got.clear();
    p->in_edges(v, TypeFilter::any(), &in_io, got);
    const std::uint64_t indeg = got.size();
    // Index probe plus at most one seek per in-edge and per block.
    EXPECT_LE(in_io.counters().random_seeks, 1 + std::min(indeg, p->block_count()));
  }
}

TEST(Partition, GammaIndexIsSmall) {
  TempDir dir("pg");
  // Every vertex in a dense interval has out-edges; keys and positions are
  // small deltas.
  std::vector<EdgeTuple> edges;
  std::mt19937_64 rng(2);
  for (InternalId s = 0; s < 50'000; ++s)
    for (int k = 0; k < 3; ++k) edges.push_back({s, rng() % 50'000, 0});
  auto p = build(dir, edges, part_config(49'999));
  EXPECT_LT(p->out_index().file_bytes(), p->out_index().raw_bytes() / 2);
}

TEST(Partition, ColumnsLazyAndWritable) {
  TempDir dir("pcol");
  Schema schema;
  schema.add({"w", ColumnKind::float64, ColumnTarget::edge});
  const auto cfg = part_config(9);
  PartitionInfo info{1, 0, 1, 0, 9};
  EdgeRun run = make_run(kThree, schema);
  const double v = 2.5;
  std::memcpy(run.rows.data() + 1 * run.row_width + schema.edge_offset(0), &v, 8);
  auto p = EdgePartition::build(dir.path(), info, run, schema, cfg, {false, nullptr});
  double got = 0;
  p->read_cell(schema.edge_column(0), 1, &got, nullptr);
  EXPECT_EQ(got, 2.5);
  p->read_cell(schema.edge_column(0), 0, &got, nullptr);
  EXPECT_EQ(got, 0.0);
  // A column added later reads as null until written.
  const ColumnSchema later{"n", ColumnKind::int32, ColumnTarget::edge};
  EXPECT_EQ(p->column_cells(later, false), nullptr);
  std::int32_t iv = 9;
  p->read_cell(later, 2, &iv, nullptr);
  EXPECT_EQ(iv, 0);
  iv = 77;
  p->write_cell(later, 2, &iv, false, nullptr);
  iv = 0;
  p->read_cell(later, 2, &iv, nullptr);
  EXPECT_EQ(iv, 77);
}

TEST(Partition, MergeRunsStable) {
  Schema schema;
  schema.add({"x", ColumnKind::int64, ColumnTarget::edge});
  auto older = make_run({{1, 2, 0}, {3, 3, 0}}, schema);
  auto newer = make_run({{1, 2, 1}, {2, 1, 0}}, schema);
  const auto m = merge_runs(older, newer);
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.edges[0], (EdgeTuple{1, 2, 0}));
  EXPECT_EQ(m.edges[1], (EdgeTuple{1, 2, 1}));
  EXPECT_EQ(m.edges[2], (EdgeTuple{2, 1, 0}));
  EXPECT_EQ(m.edges[3], (EdgeTuple{3, 3, 0}));
}

TEST(Partition, ObsoleteDirectoryRemoved) {
  TempDir dir("pobs");
  auto p = build(dir, kThree, part_config(9));
  const auto path = p->dir();
  ASSERT_TRUE(fs::exists(path));
  p->mark_obsolete();
  p.reset();
  EXPECT_FALSE(fs::exists(path));
}

}  // namespace
}  // namespace palgraph
