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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "palgraph/database.hpp"

namespace palgraph::testing {

/// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

using Triple = std::tuple<std::uint64_t, std::uint64_t, std::uint8_t>;

/// Reference multiset of edges in original IDs.
class EdgeOracle {
 public:
  void insert(std::uint64_t s, std::uint64_t d, std::uint8_t t) {
    ++edges_[{s, d, t}];
    ++rev_[{d, s, t}];
  }
  bool erase_all(std::uint64_t s, std::uint64_t d, std::uint8_t t) {
    rev_.erase({d, s, t});
    return edges_.erase({s, d, t}) > 0;
  }
  bool contains(std::uint64_t s, std::uint64_t d, std::uint8_t t) const {
    return edges_.count({s, d, t}) > 0;
  }
  std::vector<Triple> out(std::uint64_t s) const;
  std::vector<Triple> in(std::uint64_t d) const;
  std::uint64_t size() const;
  const std::map<Triple, std::uint64_t>& all() const noexcept { return edges_; }

 private:
  std::map<Triple, std::uint64_t> edges_;
  std::map<Triple, std::uint64_t> rev_;  // keyed (dst, src, type)
};

std::vector<Triple> sorted_triples(const std::vector<Edge>& edges);

inline DbConfig small_config(std::uint64_t max_id, std::uint32_t partitions,
                             std::uint64_t buffer_capacity = 1000,
                             std::uint64_t max_partition_edges = 4000) {
  DbConfig cfg;
  cfg.max_id = max_id;
  cfg.partitions = partitions;
  cfg.buffer_capacity = buffer_capacity;
  cfg.max_partition_edges = max_partition_edges;
  return cfg;
}

inline RuntimeOptions fast_options() {
  RuntimeOptions o;
  o.sync_partitions = false;
  return o;
}

}  // namespace palgraph::testing
