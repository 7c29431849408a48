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
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "palgraph/database.hpp"
#include "test_support.hpp"

namespace palgraph {
namespace {

using testing::EdgeOracle;
using testing::small_config;
using testing::sorted_triples;
using testing::TempDir;
using testing::Triple;

OriginalId O(std::uint64_t v) { return OriginalId{v}; }

void expect_matches(const Database& db, const EdgeOracle& oracle, std::uint64_t max_id) {
  for (std::uint64_t v = 0; v <= max_id; ++v) {
    ASSERT_EQ(sorted_triples(db.out_edges(O(v))), oracle.out(v)) << "out " << v;
    ASSERT_EQ(sorted_triples(db.in_edges(O(v))), oracle.in(v)) << "in " << v;
  }
}

std::uint64_t stored_live(const Database& db) {
  auto view = db.read_view();
  std::uint64_t n = 0;
  view.scan_buffers(TypeFilter::any(), [&](const EdgeRecord&) { ++n; });
  const auto& snap = view.snapshot();
  for (std::uint32_t level = 1; level <= db.shape().depth(); ++level)
    for (std::uint32_t k = 0; k < db.shape().count(level); ++k)
      if (const auto& p = snap.at(level, k)) p->scan(TypeFilter::any(), nullptr, [&](auto, auto) { ++n; });
  return n;
}

TEST(LsmShape, CountsAndOwners) {
  const LsmShape shape(small_config(999, 16));  // f = 4
  ASSERT_EQ(shape.depth(), 3u);
  EXPECT_EQ(shape.count(1), 1u);
  EXPECT_EQ(shape.count(2), 4u);
  EXPECT_EQ(shape.count(3), 16u);
  EXPECT_EQ(shape.first_leaf(2, 1), 4u);
  EXPECT_EQ(shape.last_leaf(2, 1), 7u);
  EXPECT_EQ(shape.owner(2, 13), 3u);
  EXPECT_EQ(shape.first_child(1, 0), 0u);
  EXPECT_EQ(shape.last_child(1, 0), 3u);
  EXPECT_EQ(shape.total_partitions(), 21u);

  const LsmShape odd(small_config(999, 7));  // 7 -> 2 -> 1
  ASSERT_EQ(odd.depth(), 3u);
  EXPECT_EQ(odd.count(2), 2u);
  EXPECT_EQ(odd.last_child(2, 1), 6u);
  EXPECT_EQ(odd.last_leaf(2, 1), 6u);

  auto flat_cfg = small_config(999, 16);
  flat_cfg.lsm = false;
  const LsmShape flat(flat_cfg);
  EXPECT_EQ(flat.depth(), 1u);
  EXPECT_EQ(flat.count(1), 16u);
  EXPECT_EQ(LsmShape(small_config(999, 1)).depth(), 1u);
}

TEST(WritePath, ReadYourWriteAndThreeEdgeGraph) {
  TempDir dir("w3");
  auto db = Database::create(dir / "db", small_config(9, 1), testing::fast_options());
  db->insert_edge(O(1), O(2), 0);
  db->insert_edge(O(1), O(3), 0);
  db->insert_edge(O(2), O(3), 0);
  EXPECT_EQ(sorted_triples(db->out_edges(O(1))), (std::vector<Triple>{{1, 2, 0}, {1, 3, 0}}));
  EXPECT_EQ(sorted_triples(db->in_edges(O(3))), (std::vector<Triple>{{1, 3, 0}, {2, 3, 0}}));
  db->flush();
  EXPECT_EQ(db->buffered_edges(), 0u);
  EXPECT_EQ(sorted_triples(db->out_edges(O(1))), (std::vector<Triple>{{1, 2, 0}, {1, 3, 0}}));
  EXPECT_EQ(sorted_triples(db->in_edges(O(3))), (std::vector<Triple>{{1, 3, 0}, {2, 3, 0}}));
  EXPECT_THROW(db->insert_edge(O(1), O(10), 0), Error);
  EXPECT_THROW(db->insert_edge(O(1), O(2), kTombstoneType), Error);
}

TEST(WritePath, MultiEdgesPermitted) {
  TempDir dir("wm");
  auto db = Database::create(dir / "db", small_config(9, 2), testing::fast_options());
  for (int i = 0; i < 2; ++i) {
    db->insert_edge(O(1), O(2), 0);
    db->insert_edge(O(1), O(3), 0);
    db->insert_edge(O(2), O(3), 0);
  }
  EXPECT_EQ(db->out_edges(O(1)).size(), 4u);
  db->flush();
  EXPECT_EQ(stored_live(*db), 6u);
}

TEST(WritePath, FlushWhenCapacityReached) {
  TempDir dir("wcap");
  const auto cfg = small_config(999, 4, 100, 100'000);
  auto db = Database::create(dir / "db", cfg, testing::fast_options());
  EdgeOracle oracle;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 101; ++i) {
    const auto s = rng() % 1000, d = rng() % 1000;
    db->insert_edge(O(s), O(d), 0);
    oracle.insert(s, d, 0);
  }
  EXPECT_GE(db->stats().flushes, 1u);
  EXPECT_LT(db->buffered_edges(), 100u);
  expect_matches(*db, oracle, 999);
}

TEST(WritePath, FlushPreservesQueryResults) {
  TempDir dir("wpre");
  auto db = Database::create(dir / "db", small_config(499, 8, 100'000, 100'000), testing::fast_options());
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) db->insert_edge(O(rng() % 500), O(rng() % 500), rng() % 3);
  std::vector<std::vector<Triple>> before;
  for (std::uint64_t v = 0; v < 500; ++v) {
    before.push_back(sorted_triples(db->out_edges(O(v))));
    before.push_back(sorted_triples(db->in_edges(O(v))));
  }
  db->flush();
  for (std::uint64_t v = 0; v < 500; ++v) {
    ASSERT_EQ(sorted_triples(db->out_edges(O(v))), before[2 * v]);
    ASSERT_EQ(sorted_triples(db->in_edges(O(v))), before[2 * v + 1]);
  }
}

TEST(WritePath, FlushRewritesOldPartitionPlusBuffer) {
  TempDir dir("wbytes");
  // Four leaves under one top; no partition overflows.
  auto db = Database::create(dir / "db", small_config(999, 4, 100'000, 1'000'000), testing::fast_options());
  std::mt19937_64 rng(3);
  auto fill = [&](int n) {
    for (int i = 0; i < n; ++i) db->insert_edge(O(rng() % 1000), O(rng() % 1000), 0);
  };
  fill(3000);
  const auto io0 = db->io().counters();
  db->flush();
  const auto io1 = db->io().counters();
  EXPECT_EQ(io1.edges_written - io0.edges_written, 3000u);
  fill(700);
  db->flush();
  const auto io2 = db->io().counters();
  EXPECT_EQ(io2.edges_written - io1.edges_written, 3700u);
  // The bytes written are the edge array plus indexes and no more; the edge
  // array alone is 8 bytes per edge.
  EXPECT_GE(io2.bytes_written - io1.bytes_written, 3700u * 8);
  EXPECT_EQ(db->stats().downstream_merges, 0u);
}

TEST(WritePath, OverflowRoutesEdgesToChildren) {
  TempDir dir("wroute");
  // P = 4, f = 4: one top over four leaves. The top overflows on the
  // first flush and is pushed down.
  auto db = Database::create(dir / "db", small_config(3999, 4, 100'000, 500), testing::fast_options());
  EdgeOracle oracle;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto s = rng() % 4000, d = rng() % 4000;
    db->insert_edge(O(s), O(d), 0);
    oracle.insert(s, d, 0);
  }
  db->flush();
  EXPECT_EQ(db->stats().downstream_merges, 1u);
  auto view = db->read_view();
  EXPECT_EQ(view.snapshot().at(1, 0), nullptr);
  std::vector<std::uint64_t> expected(4, 0);
  for (const auto& [t, c] : oracle.all())
    expected[db->ids().interval_of(db->ids().to_internal(O(std::get<1>(t)))).index] += c;
  for (std::uint32_t k = 0; k < 4; ++k) {
    const auto& p = view.snapshot().at(2, k);
    ASSERT_NE(p, nullptr);
    EXPECT_EQ(p->edge_count(), expected[k]);
    const auto iv = db->ids().interval(k);
    p->scan(TypeFilter::any(), nullptr, [&](std::uint64_t, const EdgeTuple& e) {
      EXPECT_TRUE(iv.contains(e.dst));
    });
  }
}

TEST(WritePath, RandomOpsMatchOracleAcrossMerges) {
  for (bool lsm : {true, false}) {
    TempDir dir("wops");
    auto cfg = small_config(2999, 16, 300, 800);
    cfg.lsm = lsm;
    auto db = Database::create(dir / "db", cfg, testing::fast_options());
    EdgeOracle oracle;
    std::vector<Triple> inserted;
    std::mt19937_64 rng(lsm ? 5 : 6);
    for (int i = 0; i < 20'000; ++i) {
      const auto op = rng() % 10;
      if (op < 7 || inserted.empty()) {
        // Skewed so duplicates and multi-edges show up.
        const auto s = rng() % 4 ? rng() % 3000 : rng() % 30;
        const auto d = rng() % 3000;
        const auto t = static_cast<std::uint8_t>(rng() % 3);
        db->insert_edge(O(s), O(d), t);
        oracle.insert(s, d, t);
        inserted.emplace_back(s, d, t);
      } else {
        const auto [s, d, t] = inserted[rng() % inserted.size()];
        ASSERT_EQ(db->delete_edge(O(s), O(d), t), oracle.erase_all(s, d, t));
      }
    }
    expect_matches(*db, oracle, 2999);
    EXPECT_GT(db->stats().flushes, 10u);
    if (lsm) EXPECT_GT(db->stats().downstream_merges, 0u);
    db->flush();
    expect_matches(*db, oracle, 2999);
    EXPECT_EQ(stored_live(*db), oracle.size());
    db.reset();
    auto again = Database::open(dir / "db", testing::fast_options());
    expect_matches(*again, oracle, 2999);
  }
}

TEST(WritePath, DeletedEdgesPhysicallyGoneAfterMerge) {
  TempDir dir("wdel");
  auto db = Database::create(dir / "db", small_config(99, 4, 100'000, 100'000), testing::fast_options());
  for (std::uint64_t v = 0; v < 100; ++v) db->insert_edge(O(v), O((v * 7) % 100), 1);
  db->flush();
  // One disk copy and one buffered copy.
  db->insert_edge(O(5), O(35), 1);
  EXPECT_TRUE(db->delete_edge(O(5), O(35), 1));
  EXPECT_FALSE(db->delete_edge(O(5), O(35), 1));
  EXPECT_FALSE(db->delete_edge(O(5), O(36), 1));
  EXPECT_TRUE(db->out_edges(O(5)).empty());
  db->insert_edge(O(0), O(1), 0);  // forces the next flush to merge the partition
  db->flush();
  const InternalId s = db->ids().to_internal(O(5)), d = db->ids().to_internal(O(35));
  auto view = db->read_view();
  std::uint64_t total = 0;
  for (std::uint32_t level = 1; level <= db->shape().depth(); ++level)
    for (std::uint32_t k = 0; k < db->shape().count(level); ++k)
      if (const auto& p = view.snapshot().at(level, k)) {
        const EdgeRun run = p->load_run(view.schema(), false, nullptr);
        for (const auto& e : run.edges) {
          EXPECT_NE(e.type, kTombstoneType);
          EXPECT_FALSE(e.src == s && e.dst == d);
        }
        total += run.size();
      }
  EXPECT_EQ(total, 100u);
}

TEST(WritePath, InsertOrUpdate) {
  TempDir dir("wupd");
  auto db = Database::create(dir / "db", small_config(99, 4, 100'000, 100'000), testing::fast_options());
  db->add_column({"w", ColumnKind::float64, ColumnTarget::edge});
  db->add_column({"n", ColumnKind::int32, ColumnTarget::edge});
  auto row = db->new_row();
  row.set("w", 1.0).set("n", std::int32_t{4});
  EXPECT_FALSE(db->insert_or_update_edge(O(1), O(2), 0, row));

  // Buffered copy: updated in place without any partition write.
  const auto before = db->io().counters();
  auto row2 = db->new_row();
  row2.set("w", 2.0);
  EXPECT_TRUE(db->insert_or_update_edge(O(1), O(2), 0, row2));
  const auto after = db->io().counters();
  EXPECT_EQ(after.bytes_written, before.bytes_written);
  EXPECT_EQ(after.edges_written, before.edges_written);
  auto out = db->out_edges(O(1));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(db->get_edge_value<double>("w", out[0].handle), 2.0);
  EXPECT_EQ(db->get_edge_value<std::int32_t>("n", out[0].handle), 4);

  // Disk copy.
  db->flush();
  auto row3 = db->new_row();
  row3.set("w", 3.0);
  EXPECT_TRUE(db->insert_or_update_edge(O(1), O(2), 0, row3));
  out = db->out_edges(O(1));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FALSE(out[0].handle.buffered());
  EXPECT_EQ(db->get_edge_value<double>("w", out[0].handle), 3.0);
  EXPECT_EQ(db->get_edge_value<std::int32_t>("n", out[0].handle), 4);
  EXPECT_EQ(db->buffered_edges(), 0u);
}

TEST(WritePath, AttributesFollowMergesAndStaleHandles) {
  TempDir dir("wattr");
  auto db = Database::create(dir / "db", small_config(999, 16, 50, 200), testing::fast_options());
  db->add_column({"w", ColumnKind::float64, ColumnTarget::edge});
  db->insert_edge(O(10), O(20), 0);
  auto h = db->out_edges(O(10)).at(0).handle;
  ASSERT_TRUE(h.buffered());
  db->set_edge_value("w", h, 2.5);
  EXPECT_EQ(db->get_edge_value<double>("w", h), 2.5);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) db->insert_edge(O(rng() % 1000), O(rng() % 1000), 1);
  EXPECT_THROW(db->get_edge_value<double>("w", h), StaleHandleError);
  EXPECT_GT(db->stats().downstream_merges, 0u);
  const auto fresh = db->out_edges(O(10), TypeFilter::only(0));
  ASSERT_EQ(fresh.size(), 1u);
  EXPECT_EQ(db->get_edge_value<double>("w", fresh[0].handle), 2.5);
  // Edges inserted without a value read as null.
  const auto others = db->out_edges(O(10), TypeFilter::only(1));
  for (const auto& e : others) EXPECT_EQ(db->get_edge_value<double>("w", e.handle), 0.0);
  // Wrong type for the column.
  EXPECT_THROW(db->get_edge_value<std::int64_t>("w", fresh[0].handle), Error);
}

TEST(WritePath, SetEdgeType) {
  TempDir dir("wtype");
  auto db = Database::create(dir / "db", small_config(99, 2), testing::fast_options());
  db->insert_edge(O(1), O(2), 0);
  db->set_edge_type(db->out_edges(O(1)).at(0).handle, 3);
  EXPECT_EQ(db->out_edges(O(1), TypeFilter::only(3)).size(), 1u);
  db->flush();
  const auto h = db->out_edges(O(1)).at(0).handle;
  db->set_edge_type(h, 4);
  EXPECT_EQ(db->in_edges(O(2), TypeFilter::only(4)).size(), 1u);
  EXPECT_TRUE(db->out_edges(O(1), TypeFilter::only(3)).empty());
  EXPECT_THROW(db->set_edge_type(h, kTombstoneType), Error);
}

TEST(WritePath, VertexValuesAndPayloads) {
  TempDir dir("wvert");
  {
    auto db = Database::create(dir / "db", small_config(999, 4), testing::fast_options());
    db->add_column({"rank", ColumnKind::float64, ColumnTarget::vertex});
    db->add_column({"body", ColumnKind::varlen_ref, ColumnTarget::edge});
    db->set_vertex_value("rank", O(17), 0.5);
    const PayloadRef ref = db->append_payload("hello world");
    auto row = db->new_row();
    row.set("body", ref);
    db->insert_edge(O(1), O(2), 0, &row);
  }
  auto db = Database::open(dir / "db", testing::fast_options());
  EXPECT_EQ(db->get_vertex_value<double>("rank", O(17)), 0.5);
  EXPECT_EQ(db->get_vertex_value<double>("rank", O(18)), 0.0);
  const auto e = db->out_edges(O(1)).at(0);
  EXPECT_EQ(db->read_payload(db->get_edge_value<PayloadRef>("body", e.handle)), "hello world");
  EXPECT_THROW(db->get_vertex_value<double>("nope", O(1)), Error);
}

TEST(WritePath, InEdgesProbeOnePartitionPerLevel) {
  TempDir dir("wprobe");
  auto db = Database::create(dir / "db", small_config(9999, 16, 500, 2000), testing::fast_options());
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20'000; ++i) db->insert_edge(O(rng() % 10'000), O(rng() % 10'000), 0);
  const std::uint32_t depth = db->shape().depth();
  ASSERT_EQ(depth, 3u);
  for (int i = 0; i < 200; ++i) {
    IoStats io;
    (void)db->in_edges(O(rng() % 10'000), TypeFilter::any(), &io);
    EXPECT_EQ(io.counters().partitions_probed, depth);
  }
  IoStats io;
  (void)db->out_edges(O(5), TypeFilter::any(), &io);
  EXPECT_EQ(io.counters().partitions_probed, db->shape().total_partitions());
}

TEST(WritePath, ParallelProbesAgree) {
  TempDir dir("wpar");
  auto cfg = small_config(9999, 16, 500, 2000);
  RuntimeOptions opts = testing::fast_options();
  auto db = Database::create(dir / "db", cfg, opts);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20'000; ++i) db->insert_edge(O(rng() % 10'000), O(rng() % 10'000), 0);
  db.reset();
  opts.query_threads = 4;
  auto par = Database::open(dir / "db", opts);
  auto seq = Database::open(dir / "db", testing::fast_options());
  for (std::uint64_t v = 0; v < 10'000; v += 37) {
    ASSERT_EQ(sorted_triples(par->out_edges(O(v))), sorted_triples(seq->out_edges(O(v))));
    ASSERT_EQ(sorted_triples(par->in_edges(O(v))), sorted_triples(seq->in_edges(O(v))));
  }
}

TEST(WritePath, ConcurrentReadersDuringWrites) {
  TempDir dir("wconc");
  auto db = Database::create(dir / "db", small_config(999, 8, 200, 1000), testing::fast_options());
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> reads{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r)
    readers.emplace_back([&, r] {
      std::mt19937_64 rng(100 + r);
      while (!done.load()) {
        // Edge (v, v+1) mod 1000 is inserted once and never removed.
        const auto v = rng() % 1000;
        (void)db->in_edges(O(v));
        (void)db->out_edges(O(v));
        reads.fetch_add(1);
      }
    });
  for (std::uint64_t i = 0; i < 10'000; ++i) db->insert_edge(O(i % 1000), O((i * 13 + 1) % 1000), 0);
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_GT(reads.load(), 0u);
  std::uint64_t total = 0;
  for (std::uint64_t v = 0; v < 1000; ++v) total += db->out_edges(O(v)).size();
  EXPECT_EQ(total, 10'000u);
}

TEST(WritePath, BackgroundFlushMatchesOracle) {
  TempDir dir("wbg");
  RuntimeOptions opts = testing::fast_options();
  opts.flush_mode = FlushMode::background;
  auto db = Database::create(dir / "db", small_config(1999, 8, 200, 1000), opts);
  EdgeOracle oracle;
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10'000; ++i) {
    const auto s = rng() % 2000, d = rng() % 2000;
    db->insert_edge(O(s), O(d), 0);
    oracle.insert(s, d, 0);
  }
  EXPECT_GT(db->stats().flushes, 0u);
  // The writer is never further than twice the capacity ahead.
  EXPECT_LT(db->stats().buffered_slots, 2 * 200u + 1);
  expect_matches(*db, oracle, 1999);
  db->close();
  auto again = Database::open(dir / "db", testing::fast_options());
  expect_matches(*again, oracle, 1999);
}

TEST(WritePath, OpenRejectsMissingAndDuplicate) {
  TempDir dir("wopen");
  EXPECT_THROW(Database::open(dir / "nothing"), Error);
  auto db = Database::create(dir / "db", small_config(9, 1));
  EXPECT_THROW(Database::create(dir / "db", small_config(9, 1)), Error);
}

TEST(WritePath, OrphanPartitionsRemovedOnOpen) {
  TempDir dir("worph");
  {
    auto db = Database::create(dir / "db", small_config(99, 4), testing::fast_options());
    db->insert_edge(O(1), O(2), 0);
  }
  const fs::path orphan = dir / "db/parts/L1/p999";
  fs::create_directories(orphan);
  auto db = Database::open(dir / "db", testing::fast_options());
  EXPECT_FALSE(fs::exists(orphan));
  EXPECT_EQ(db->out_edges(O(1)).size(), 1u);
}

// --- durability ------------------------------------------------------------------

DbConfig durable_config(std::uint64_t capacity) {
  auto cfg = small_config(9999, 8, capacity, 2000);
  cfg.durable_buffers = true;
  return cfg;
}

TEST(Durability, WalReplayAfterAbandon) {
  TempDir dir("dwal");
  {
    auto db = Database::create(dir / "db", durable_config(100'000));
    db->add_column({"w", ColumnKind::float64, ColumnTarget::edge});
    db->insert_edge(O(1), O(2), 0);
    db->insert_edge(O(1), O(3), 0);
    db->insert_edge(O(4), O(3), 2);
    EXPECT_TRUE(db->delete_edge(O(1), O(3), 0));
    auto row = db->new_row();
    row.set("w", 7.5);
    EXPECT_TRUE(db->insert_or_update_edge(O(1), O(2), 0, row));
    db->set_edge_type(db->out_edges(O(4)).at(0).handle, 5);
    // Skip close(): simulate a crash by copying the directory as it is now.
    fs::copy(dir / "db", dir / "copy", fs::copy_options::recursive);
  }
  auto db = Database::open(dir / "copy");
  EXPECT_EQ(db->buffered_edges(), 2u);
  EXPECT_EQ(sorted_triples(db->out_edges(O(1))), (std::vector<Triple>{{1, 2, 0}}));
  EXPECT_EQ(sorted_triples(db->in_edges(O(3))), (std::vector<Triple>{{4, 3, 5}}));
  EXPECT_EQ(db->get_edge_value<double>("w", db->out_edges(O(1)).at(0).handle), 7.5);
}

TEST(Durability, TornWalTailIgnored) {
  TempDir dir("dtorn");
  {
    auto db = Database::create(dir / "db", durable_config(100'000));
    db->insert_edge(O(1), O(2), 0);
    db->insert_edge(O(1), O(3), 0);
    fs::copy(dir / "db", dir / "copy", fs::copy_options::recursive);
  }
  const fs::path wal = dir / "copy/wal.log";
  fs::resize_file(wal, fs::file_size(wal) - 2);
  auto db = Database::open(dir / "copy");
  EXPECT_EQ(sorted_triples(db->out_edges(O(1))), (std::vector<Triple>{{1, 2, 0}}));
}

TEST(Durability, WalGenerationMismatchIsCorruption) {
  TempDir dir("dgen");
  {
    auto db = Database::create(dir / "db", durable_config(100'000));
    db->insert_edge(O(1), O(2), 0);
    fs::copy(dir / "db/wal.log", dir / "old.log");
    db->flush();
  }
  fs::copy(dir / "old.log", dir / "db/wal.log", fs::copy_options::overwrite_existing);
  EXPECT_THROW(Database::open(dir / "db"), CorruptionError);
}

// Child: inserts distinct edges and reports each acknowledged index on a
// pipe. The parent kills it and checks that the reopened database holds
// exactly a prefix covering every acknowledged insert.
void run_writer(const fs::path& root, int fd, std::uint64_t count) {
  try {
    auto db = Database::open(root);
    for (std::uint64_t i = 0; i < count; ++i) {
      db->insert_edge(O(i % 10'000), O((i * 7919 + 1) % 10'000), static_cast<std::uint8_t>(i % 5));
      if (i % 97 == 13) db->delete_edge(O(0), O(1), 14);  // no-op delete, exercises logging
      const std::uint64_t ack = i + 1;
      if (::write(fd, &ack, sizeof ack) != sizeof ack) ::_exit(3);
    }
  } catch (...) {
    ::_exit(2);
  }
  ::_exit(0);
}

TEST(Durability, SigkillAfterAckKeepsEverySyncedInsert) {
  const std::uint64_t total = 3000;
  for (std::uint64_t kill_at : {1ull, 150ull, 777ull, 2000ull}) {
    TempDir dir("dkill");
    Database::create(dir / "db", durable_config(256)).reset();
    int fds[2];
    ASSERT_EQ(::pipe(fds), 0);
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      ::close(fds[0]);
      run_writer(dir / "db", fds[1], total);
    }
    ::close(fds[1]);
    std::uint64_t acked = 0, ack = 0;
    while (acked < kill_at && ::read(fds[0], &ack, sizeof ack) == sizeof ack) acked = ack;
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    ::close(fds[0]);
    ASSERT_EQ(acked, kill_at);

    auto db = Database::open(dir / "db");
    std::multiset<Triple> got;
    for (std::uint64_t v = 0; v < 10'000; ++v)
      for (const auto& t : sorted_triples(db->out_edges(O(v)))) got.insert(t);
    const std::uint64_t n = got.size();
    EXPECT_GE(n, acked) << "kill_at " << kill_at;
    ASSERT_LE(n, total);
    std::multiset<Triple> expected;
    for (std::uint64_t i = 0; i < n; ++i)
      expected.insert({i % 10'000, (i * 7919 + 1) % 10'000, static_cast<std::uint8_t>(i % 5)});
    EXPECT_EQ(got, expected) << "kill_at " << kill_at;
  }
}

TEST(Durability, GroupCommitSharesSyncs) {
  TempDir dir("dgroup");
  auto db = Database::create(dir / "db", durable_config(1'000'000));
  const int threads = 4, per = 200;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = 0; i < per; ++i) db->insert_edge(O(t * 1000 + i), O(i), 0);
    });
  for (auto& t : pool) t.join();
  const auto syncs = db->stats().wal_syncs;
  EXPECT_GT(syncs, 0u);
  EXPECT_LE(syncs, static_cast<std::uint64_t>(threads * per));
  std::uint64_t total = 0;
  for (int t = 0; t < threads; ++t)
    for (int i = 0; i < per; ++i) total += db->out_edges(O(t * 1000 + i)).size();
  EXPECT_EQ(total, static_cast<std::uint64_t>(threads * per));
}

}  // namespace
}  // namespace palgraph
