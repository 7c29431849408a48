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

#include <random>
#include <vector>

#include "palgraph/core.hpp"
#include "test_support.hpp"

namespace palgraph {
namespace {

DbConfig hash_config(std::uint64_t max_id, std::uint32_t p) {
  DbConfig cfg;
  cfg.max_id = max_id;
  cfg.partitions = p;
  return cfg;
}

TEST(IdHash, WorkedExamples) {
  const DbConfig cfg = hash_config(39, 4);
  ASSERT_EQ(cfg.interval_length(), 10u);
  EXPECT_EQ(to_internal(OriginalId{0}, cfg), 0u);
  EXPECT_EQ(to_internal(OriginalId{5}, cfg), 11u);
  EXPECT_EQ(to_internal(OriginalId{39}, cfg), 39u);
  EXPECT_EQ(raw(to_original(11, cfg)), 5u);
  EXPECT_EQ(raw(to_original(0, cfg)), 0u);
  EXPECT_EQ(raw(to_original(39, cfg)), 39u);
}

TEST(IdHash, RejectsOutOfRange) {
  const DbConfig cfg = hash_config(39, 4);
  EXPECT_THROW(to_internal(OriginalId{40}, cfg), Error);
  EXPECT_THROW(to_original(40, cfg), Error);
  try {
    to_internal(OriginalId{1000}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_range);
  }
}

TEST(IdHash, IntervalOfExamples) {
  const DbConfig cfg = hash_config(999'999, 4);
  ASSERT_EQ(cfg.interval_length(), 250'000u);
  const VertexInterval iv = interval_of(260'379, cfg);
  EXPECT_EQ(iv.index, 1u);
  EXPECT_EQ(iv.offset_of(260'379), 10'379u);
  EXPECT_EQ(interval_of(0, cfg).index, 0u);
  EXPECT_EQ(interval_of(249'999, cfg).index, 0u);
  EXPECT_EQ(interval_of(250'000, cfg).index, 1u);
  EXPECT_THROW(interval_of(1'000'000, cfg), Error);
}

TEST(IdHash, ExhaustiveRoundTripAndInjective) {
  for (std::uint32_t p : {1u, 3u, 4u, 7u, 16u}) {
    const IdSpace ids(hash_config(100'000, p));
    std::vector<bool> seen(ids.size(), false);
    for (std::uint64_t o = 0; o <= ids.max_id(); ++o) {
      const InternalId v = ids.to_internal(OriginalId{o});
      ASSERT_LT(v, ids.size());
      ASSERT_FALSE(seen[v]) << "collision at " << o;
      seen[v] = true;
      ASSERT_EQ(raw(ids.to_original(v)), o);
      ASSERT_TRUE(ids.is_vertex(v));
    }
    // Images above max_id are exactly the unused slots.
    for (InternalId v = 0; v < ids.size(); ++v) ASSERT_EQ(ids.is_vertex(v), bool(seen[v]));
  }
}

TEST(IdHash, InverseOnWholeInternalRange) {
  const IdSpace ids(hash_config(1'000, 16));
  for (InternalId v = 0; v < ids.size(); ++v) {
    const std::uint64_t o = raw(ids.to_original(v));
    if (o <= ids.max_id()) ASSERT_EQ(ids.to_internal(OriginalId{o}), v);
  }
}

TEST(IdHash, RandomizedRoundTripLargeSpace) {
  const IdSpace ids(hash_config((std::uint64_t{1} << 34) + 12345, 64));
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> dist(0, ids.max_id());
  for (int i = 0; i < 200'000; ++i) {
    const std::uint64_t o = dist(rng);
    ASSERT_EQ(raw(ids.to_original(ids.to_internal(OriginalId{o}))), o);
  }
}

TEST(IdHash, BalancesUniformSample) {
  const IdSpace ids(hash_config(1'000'000, 16));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> dist(0, ids.max_id());
  std::vector<std::uint64_t> counts(16, 0);
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ++counts[ids.interval_of(ids.to_internal(OriginalId{dist(rng)})).index];
  const double mean = double(n) / 16.0;
  for (auto c : counts) EXPECT_LT(std::abs(double(c) - mean) / mean, 0.05);
}

TEST(Intervals, TileTheInternalRange) {
  const IdSpace ids(hash_config(1'234, 7));
  InternalId next = 0;
  for (std::uint32_t i = 0; i < ids.partitions(); ++i) {
    const VertexInterval iv = ids.interval(i);
    EXPECT_EQ(iv.lo, next);
    EXPECT_EQ(iv.hi - iv.lo + 1, ids.interval_length());
    EXPECT_EQ(ids.interval_of(iv.lo), iv);
    EXPECT_EQ(ids.interval_of(iv.hi), iv);
    next = iv.hi + 1;
  }
  EXPECT_EQ(next, ids.size());
  EXPECT_GT(ids.size(), ids.max_id());
}

TEST(Config, SaveLoadRoundTrip) {
  testing::TempDir dir("cfg");
  DbConfig cfg = hash_config(5'000, 8);
  cfg.branching = 3;
  cfg.lsm = false;
  cfg.buffer_capacity = 77;
  cfg.max_partition_edges = 999;
  cfg.durable_buffers = true;
  cfg.out_index = IndexKind::sparse;
  cfg.save(dir / "config");
  const DbConfig back = DbConfig::load(dir / "config");
  EXPECT_EQ(back.max_id, cfg.max_id);
  EXPECT_EQ(back.partitions, cfg.partitions);
  EXPECT_EQ(back.branching, 3u);
  EXPECT_FALSE(back.lsm);
  EXPECT_EQ(back.buffer_capacity, 77u);
  EXPECT_EQ(back.max_partition_edges, 999u);
  EXPECT_TRUE(back.durable_buffers);
  EXPECT_EQ(back.out_index, IndexKind::sparse);
}

TEST(Config, ValidateRejectsBadValues) {
  DbConfig cfg = hash_config(100, 4);
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.partitions = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.branching = 1;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.max_partition_edges = kMaxPartitionEdges;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.max_id = kMaxVertexIdSpace;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(TypeFilter, NeverAcceptsTombstone) {
  EXPECT_FALSE(TypeFilter::any().accepts(kTombstoneType));
  EXPECT_TRUE(TypeFilter::any().accepts(0));
  EXPECT_TRUE(TypeFilter::only(3).accepts(3));
  EXPECT_FALSE(TypeFilter::only(3).accepts(4));
  EXPECT_FALSE(TypeFilter::only(kTombstoneType).accepts(kTombstoneType));
  EXPECT_FALSE(TypeFilter::none().accepts(0));
}

}  // namespace
}  // namespace palgraph
