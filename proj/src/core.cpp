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

#include "palgraph/core.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "palgraph/file_util.hpp"

namespace palgraph {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::out_of_range: return "out of range";
    case Errc::corruption: return "corruption";
    case Errc::stale_handle: return "stale handle";
    case Errc::io: return "i/o error";
    case Errc::capacity: return "capacity exceeded";
    case Errc::schema: return "schema mismatch";
  }
  return "unknown";
}

const char* index_kind_name(IndexKind kind) noexcept {
  switch (kind) {
    case IndexKind::gamma: return "gamma";
    case IndexKind::sparse: return "sparse";
    case IndexKind::binary: return "binary";
  }
  return "gamma";
}

IndexKind parse_index_kind(std::string_view text) {
  if (text == "gamma") return IndexKind::gamma;
  if (text == "sparse") return IndexKind::sparse;
  if (text == "binary") return IndexKind::binary;
  throw Error(Errc::invalid_argument,
              "unknown index kind '" + std::string(text) + "'");
}

void DbConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(Errc::invalid_argument, "invalid config: " + msg);
  };
  if (partitions < 1) fail("partitions must be >= 1");
  if (branching < 2) fail("branching factor must be >= 2");
  if (max_id >= kMaxVertexIdSpace) fail("max_id does not fit 36 bits");
  if (id_space() - 1 >= kMaxVertexIdSpace)
    fail("P * L exceeds the 36-bit internal ID space");
  if (max_partition_edges < 1 || max_partition_edges >= kMaxPartitionEdges)
    fail("max_partition_edges must be in [1, 2^24 - 1)");
  if (buffer_capacity < 1) fail("buffer_capacity must be >= 1");
  if (block_size < 8) fail("block_size must be >= 8 bytes");
  if (sparse_stride < 1) fail("sparse_stride must be >= 1");
  if (layout_version != 1) fail("unsupported layout version");
}

void DbConfig::save(const std::filesystem::path& file) const {
  std::ostringstream out;
  out << "layout_version=" << layout_version << '\n'
      << "max_id=" << max_id << '\n'
      << "partitions=" << partitions << '\n'
      << "interval_length=" << interval_length() << '\n'
      << "branching=" << branching << '\n'
      << "lsm=" << (lsm ? 1 : 0) << '\n'
      << "buffer_capacity=" << buffer_capacity << '\n'
      << "max_partition_edges=" << max_partition_edges << '\n'
      << "durable_buffers=" << (durable_buffers ? 1 : 0) << '\n'
      << "block_size=" << block_size << '\n'
      << "out_index=" << index_kind_name(out_index) << '\n'
      << "sparse_stride=" << sparse_stride << '\n';
  write_file_atomic(file, out.str(), true);
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw CorruptionError("config: bad integer for '" + key + "': " + value);
  return out;
}

}  // namespace

DbConfig DbConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::io, "cannot open " + file.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CorruptionError("config: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CorruptionError("config: missing key '" + key + "'");
    return it->second;
  };
  DbConfig cfg;
  cfg.layout_version = static_cast<std::uint32_t>(parse_u64("layout_version", need("layout_version")));
  cfg.max_id = parse_u64("max_id", need("max_id"));
  cfg.partitions = static_cast<std::uint32_t>(parse_u64("partitions", need("partitions")));
  cfg.branching = static_cast<std::uint32_t>(parse_u64("branching", need("branching")));
  cfg.lsm = parse_u64("lsm", need("lsm")) != 0;
  cfg.buffer_capacity = parse_u64("buffer_capacity", need("buffer_capacity"));
  cfg.max_partition_edges = parse_u64("max_partition_edges", need("max_partition_edges"));
  cfg.durable_buffers = parse_u64("durable_buffers", need("durable_buffers")) != 0;
  cfg.block_size = static_cast<std::uint32_t>(parse_u64("block_size", need("block_size")));
  cfg.out_index = parse_index_kind(need("out_index"));
  cfg.sparse_stride = static_cast<std::uint32_t>(parse_u64("sparse_stride", need("sparse_stride")));
  if (auto it = kv.find("interval_length"); it != kv.end() &&
      parse_u64("interval_length", it->second) != cfg.interval_length())
    throw CorruptionError("config: interval_length disagrees with max_id / partitions");
  cfg.validate();
  return cfg;
}

InternalId IdSpace::to_internal(OriginalId orig) const {
  const std::uint64_t o = raw(orig);
  if (o > max_id_)
    throw Error(Errc::out_of_range,
                "vertex id " + std::to_string(o) + " exceeds max_id " + std::to_string(max_id_));
  return (o % partitions_) * length_ + o / partitions_;
}

OriginalId IdSpace::to_original(InternalId intern) const {
  if (intern >= size())
    throw Error(Errc::out_of_range, "internal id " + std::to_string(intern) + " out of range");
  return OriginalId{(intern % length_) * partitions_ + intern / length_};
}

VertexInterval IdSpace::interval_of(InternalId v) const {
  if (v >= size())
    throw Error(Errc::out_of_range, "internal id " + std::to_string(v) + " out of range");
  return interval(static_cast<std::uint32_t>(v / length_));
}

VertexInterval IdSpace::interval(std::uint32_t index) const {
  if (index >= partitions_)
    throw Error(Errc::out_of_range, "interval index " + std::to_string(index) + " out of range");
  return VertexInterval{index, index * length_, (index + 1) * length_ - 1};
}

InternalId to_internal(OriginalId orig, const DbConfig& cfg) {
  return IdSpace(cfg).to_internal(orig);
}

OriginalId to_original(InternalId intern, const DbConfig& cfg) {
  return IdSpace(cfg).to_original(intern);
}

VertexInterval interval_of(InternalId v, const DbConfig& cfg) {
  return IdSpace(cfg).interval_of(v);
}

IoCounters& IoCounters::operator+=(const IoCounters& o) noexcept {
  random_seeks += o.random_seeks;
  sequential_blocks += o.sequential_blocks;
  bytes_read += o.bytes_read;
  bytes_written += o.bytes_written;
  edges_written += o.edges_written;
  partitions_probed += o.partitions_probed;
  return *this;
}

IoCounters operator-(IoCounters a, const IoCounters& b) noexcept {
  a.random_seeks -= b.random_seeks;
  a.sequential_blocks -= b.sequential_blocks;
  a.bytes_read -= b.bytes_read;
  a.bytes_written -= b.bytes_written;
  a.edges_written -= b.edges_written;
  a.partitions_probed -= b.partitions_probed;
  return a;
}

IoCounters IoStats::counters() const noexcept {
  IoCounters c;
  c.random_seeks = random_seeks_.load(std::memory_order_relaxed);
  c.sequential_blocks = sequential_blocks_.load(std::memory_order_relaxed);
  c.bytes_read = bytes_read_.load(std::memory_order_relaxed);
  c.bytes_written = bytes_written_.load(std::memory_order_relaxed);
  c.edges_written = edges_written_.load(std::memory_order_relaxed);
  c.partitions_probed = partitions_probed_.load(std::memory_order_relaxed);
  return c;
}

void IoStats::merge(const IoCounters& c) noexcept {
  seek(c.random_seeks);
  blocks(c.sequential_blocks);
  read(c.bytes_read);
  wrote(c.bytes_written);
  edges_written(c.edges_written);
  probed(c.partitions_probed);
}

void IoStats::reset() noexcept {
  random_seeks_ = 0;
  sequential_blocks_ = 0;
  bytes_read_ = 0;
  bytes_written_ = 0;
  edges_written_ = 0;
  partitions_probed_ = 0;
}

}  // namespace palgraph
