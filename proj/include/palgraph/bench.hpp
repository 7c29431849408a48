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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "palgraph/database.hpp"

namespace palgraph::bench {

enum class Op : std::uint8_t {
  node_get,
  node_insert,
  node_update,
  edge_insert_or_update,
  edge_delete,
  edge_update,
  edge_getrange,
  edge_outnbrs,
};
inline constexpr std::size_t kOpCount = 8;
const char* op_name(Op op) noexcept;
Op parse_op(std::string_view name);

/// Log-normal payload lengths, clipped to [1, 1024] bytes.
struct PayloadLength {
  double mu = 3.0;
  double sigma = 1.0;
};

struct WorkloadSpec {
  std::uint64_t vertices = 100'000;
  double edges_per_vertex = 5.0;
  /// Uniform targets instead of u+1, u+2, ...
  bool random_targets = false;
  unsigned edge_types = 2;
  std::array<double, kOpCount> mix{};
  PayloadLength node_payload{4.0, 1.0};
  PayloadLength edge_payload{3.0, 1.0};
  unsigned threads = 4;
  /// Total over all threads; ignored when duration_seconds > 0.
  std::uint64_t ops = 50'000;
  double duration_seconds = 0;
  std::uint64_t seed = 1;
  /// Width of the timestamp window an edge_getrange asks for.
  std::int64_t range_window = 1000;
  std::uint64_t range_limit = 10'000;

  WorkloadSpec();  // default mix
  double weight(Op op) const { return mix[static_cast<std::size_t>(op)]; }
  /// Throws Error(invalid_argument) on a bad spec, e.g. weights not summing to 1.
  void validate() const;
  /// Node IDs handed out by node_insert start here; the database needs
  /// max_id >= this plus the inserts.
  std::uint64_t first_new_node() const;
  std::uint64_t required_max_id() const;

  static WorkloadSpec from_json(std::string_view text);
  std::string to_json() const;
};

struct OpLatency {
  Op op{};
  std::uint64_t count = 0;
  double mean_ms = 0, p50_ms = 0, p75_ms = 0, p95_ms = 0, p99_ms = 0;
};

struct LatencyReport {
  std::vector<OpLatency> ops;  // ops with at least one sample, in Op order
  std::uint64_t total_ops = 0;
  double wall_seconds = 0;
  double throughput = 0;  ///< total_ops / wall_seconds
  IoCounters io;
  std::uint64_t oracle_checks = 0;
  std::uint64_t oracle_mismatches = 0;
  std::uint64_t trace_hash = 0;

  void print_table(std::ostream& out) const;
  /// op,count,mean_ms,p50_ms,p75_ms,p95_ms,p99_ms then a throughput row.
  void write_csv(std::ostream& out) const;
};

/// Nearest-rank percentile of the samples; sorts them.
double percentile(std::vector<double>& samples, double q);

/// What one operation resolved to; independent of timing.
struct TraceEntry {
  Op op{};
  std::uint32_t thread = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint8_t type = 0;
  std::uint32_t payload_length = 0;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RunOptions {
  /// Replays every operation into an in-memory model, checks reads of
  /// thread-owned keys as they happen and compares the final state.
  bool shadow_oracle = false;
  /// Keep the per-thread traces (in thread order) in `trace`.
  bool keep_trace = false;
  std::vector<TraceEntry>* trace = nullptr;
};

/// Creates the bench columns and loads the generated graph and nodes.
void seed(Database& db, const WorkloadSpec& spec);
/// Runs the mix. Writes are partitioned by thread (source vertex and node
/// ID modulo the thread count), so each thread's trace depends only on the
/// seed and its own earlier operations.
LatencyReport run(Database& db, const WorkloadSpec& spec, const RunOptions& opts = {});

}  // namespace palgraph::bench
