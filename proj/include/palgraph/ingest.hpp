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
#include <iosfwd>
#include <string>
#include <vector>

#include "palgraph/database.hpp"

namespace palgraph {

enum class EdgeFileFormat : std::uint8_t {
  text,    ///< "src dst [type]" per line; '#' starts a comment
  binary,  ///< little-endian u64 src, u64 dst pairs, type 0
};

struct IngestOptions {
  EdgeFileFormat format = EdgeFileFormat::text;
  /// Skip an edge whose (src, dst, type) already exists.
  bool dedup = false;
  /// Malformed input throws instead of being counted and skipped.
  bool strict = false;
  double bucket_seconds = 1.0;
  /// Called for each skipped malformed line (1-based line number).
  std::function<void(std::uint64_t, const std::string&)> on_malformed;
};

struct IngestBucket {
  double elapsed_seconds = 0;
  std::uint64_t edges_total = 0;
  double edges_per_second = 0;  ///< within the bucket
};

struct IngestReport {
  std::uint64_t lines = 0;
  std::uint64_t inserted = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t malformed = 0;
  double seconds = 0;
  std::vector<IngestBucket> buckets;
  IoCounters io;

  double edges_per_second() const { return seconds > 0 ? double(inserted) / seconds : 0; }
  /// elapsed_s,edges_total,edges_per_s
  void write_csv(std::ostream& out) const;
};

/// Inserts through the ordinary write path.
IngestReport ingest_edges(Database& db, std::istream& in, const IngestOptions& opts = {});

}  // namespace palgraph
