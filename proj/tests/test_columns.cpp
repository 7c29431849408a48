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

#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "palgraph/columns.hpp"
#include "test_support.hpp"

namespace palgraph {
namespace {

using testing::TempDir;

TEST(Schema, LayoutAlignsAndAppends) {
  Schema s;
  s.add({"a", ColumnKind::int8, ColumnTarget::edge});
  s.add({"b", ColumnKind::int64, ColumnTarget::edge});
  s.add({"c", ColumnKind::int32, ColumnTarget::edge});
  s.add({"rank", ColumnKind::float64, ColumnTarget::vertex});
  EXPECT_EQ(s.edge_column_count(), 3u);
  EXPECT_EQ(s.edge_offset(0), 0u);
  EXPECT_EQ(s.edge_offset(1), 8u);
  EXPECT_EQ(s.edge_offset(2), 16u);
  EXPECT_EQ(s.row_width(), 20u);
  EXPECT_TRUE(s.vertex_column("rank"));
  EXPECT_FALSE(s.edge_index("rank"));
  EXPECT_THROW(s.add({"b", ColumnKind::int8, ColumnTarget::edge}), Error);
  EXPECT_THROW(s.add({"bad name", ColumnKind::int8, ColumnTarget::edge}), Error);
  EXPECT_THROW(s.edge_column("zzz"), Error);
}

TEST(Schema, SaveLoadAndPad) {
  TempDir dir("schema");
  Schema s;
  s.add({"w", ColumnKind::float32, ColumnTarget::edge});
  s.add({"p", ColumnKind::varlen_ref, ColumnTarget::edge});
  s.add({"deg", ColumnKind::int64, ColumnTarget::vertex});
  s.save(dir / "schema.txt", false);
  const Schema back = Schema::load(dir / "schema.txt");
  ASSERT_EQ(back.columns().size(), 3u);
  EXPECT_EQ(back.row_width(), s.row_width());
  EXPECT_EQ(back.edge_column("p").kind, ColumnKind::varlen_ref);
  EXPECT_EQ(Schema::load(dir / "missing").columns().size(), 0u);

  Schema small;
  small.add({"w", ColumnKind::float32, ColumnTarget::edge});
  std::vector<std::byte> row = small.null_row();
  const float f = 1.5f;
  std::memcpy(row.data(), &f, 4);
  s.pad_row(row);
  ASSERT_EQ(row.size(), s.row_width());
  PayloadRef ref;
  std::memcpy(&ref, row.data() + s.edge_offset(1), 8);
  EXPECT_TRUE(ref.is_null());
  float back_f;
  std::memcpy(&back_f, row.data(), 4);
  EXPECT_EQ(back_f, 1.5f);
}

TEST(AttributeRow, TypedAccess) {
  auto s = std::make_shared<Schema>();
  s->add({"w", ColumnKind::float64, ColumnTarget::edge});
  s->add({"ts", ColumnKind::timestamp, ColumnTarget::edge});
  AttributeRow row(s);
  row.set("w", 2.5).set("ts", std::int64_t{1234});
  EXPECT_EQ(row.get<double>("w"), 2.5);
  EXPECT_EQ(row.get<std::int64_t>("ts"), 1234);
  EXPECT_EQ(row.set_mask(), 3u);
  EXPECT_THROW(row.set("w", 1), Error);  // int is not float64
  EXPECT_THROW(row.set("nope", 1.0), Error);
}

TEST(VertexColumns, OffsetWithinInterval) {
  TempDir dir("vcol");
  DbConfig cfg;
  cfg.max_id = 999'999;
  cfg.partitions = 4;
  const IdSpace ids(cfg);
  const ColumnSchema col{"rank", ColumnKind::float64, ColumnTarget::vertex};
  {
    VertexColumnStore store(dir.path(), ids, false);
    const double v = 0.125;
    store.write(col, 260'379, &v, nullptr);
    double got = 0;
    store.read(col, 260'379, &got, nullptr);
    EXPECT_EQ(got, 0.125);
    store.read(col, 260'380, &got, nullptr);
    EXPECT_EQ(got, 0.0);
  }
  std::ifstream in(dir / "rank/i1.bin", std::ios::binary);
  ASSERT_TRUE(in);
  in.seekg(static_cast<std::streamoff>(kFileHeaderSize + 10'379 * 8));
  double raw_value = 0;
  in.read(reinterpret_cast<char*>(&raw_value), 8);
  EXPECT_EQ(raw_value, 0.125);
  EXPECT_FALSE(fs::exists(dir / "rank/i0.bin"));
}

TEST(VertexColumns, RandomWritesMatchMapAndPersist) {
  TempDir dir("vcol2");
  DbConfig cfg;
  cfg.max_id = 100'000;
  cfg.partitions = 8;
  const IdSpace ids(cfg);
  const ColumnSchema col{"c", ColumnKind::int32, ColumnTarget::vertex};
  std::map<InternalId, std::int32_t> oracle;
  std::mt19937_64 rng(4);
  {
    VertexColumnStore store(dir.path(), ids, false);
    for (int i = 0; i < 10'000; ++i) {
      const InternalId v = ids.to_internal(OriginalId{rng() % (cfg.max_id + 1)});
      const auto x = static_cast<std::int32_t>(rng());
      store.write(col, v, &x, nullptr);
      oracle[v] = x;
    }
    for (auto [v, x] : oracle) {
      std::int32_t got;
      store.read(col, v, &got, nullptr);
      ASSERT_EQ(got, x);
    }
  }
  VertexColumnStore reopened(dir.path(), ids, false);
  for (auto [v, x] : oracle) {
    std::int32_t got;
    reopened.read(col, v, &got, nullptr);
    ASSERT_EQ(got, x);
  }
}

TEST(PayloadLog, RoundTripInOrder) {
  TempDir dir("plog");
  std::vector<std::pair<PayloadRef, std::string>> written;
  std::mt19937_64 rng(8);
  {
    auto log = PayloadLog::open(dir / "v.log", false);
    for (int i = 0; i < 10'000; ++i) {
      std::string s(rng() % 200, '\0');
      for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
      written.push_back({log->append(s), s});
    }
    for (std::size_t i = 1; i < written.size(); ++i)
      ASSERT_GT(written[i].first.position, written[i - 1].first.position);
  }
  auto log = PayloadLog::open(dir / "v.log", false);
  for (const auto& [ref, s] : written) ASSERT_EQ(log->read(ref), s);
  EXPECT_THROW(log->read(PayloadRef{}), Error);
  EXPECT_THROW(log->read(PayloadRef{log->end() + 10}), Error);
}

TEST(PayloadLog, TornTailTruncated) {
  TempDir dir("plog2");
  PayloadRef a, b;
  {
    auto log = PayloadLog::open(dir / "v.log", false);
    a = log->append(std::string("first"));
    b = log->append(std::string("second record"));
  }
  const auto full = fs::file_size(dir / "v.log");
  fs::resize_file(dir / "v.log", full - 3);
  auto log = PayloadLog::open(dir / "v.log", false);
  EXPECT_EQ(log->read(a), "first");
  EXPECT_EQ(log->end(), b.position);
  EXPECT_THROW(log->read(b), Error);
  const PayloadRef c = log->append(std::string("third"));
  EXPECT_EQ(c.position, b.position);
  EXPECT_EQ(log->read(c), "third");
}

}  // namespace
}  // namespace palgraph
