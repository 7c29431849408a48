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

#include "palgraph/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "palgraph/graphgen.hpp"

namespace palgraph::bench {

namespace {

constexpr std::array<const char*, kOpCount> kOpNames = {
    "node_get",    "node_insert",   "node_update",   "edge_insert_or_update",
    "edge_delete", "edge_update",   "edge_getrange", "edge_outnbrs"};

const ColumnSchema kNodePayload{"node_payload", ColumnKind::varlen_ref, ColumnTarget::vertex};
const ColumnSchema kNodeVersion{"node_version", ColumnKind::int64, ColumnTarget::vertex};
const ColumnSchema kNodeTime{"node_time", ColumnKind::timestamp, ColumnTarget::vertex};
const ColumnSchema kEdgeTime{"ts", ColumnKind::timestamp, ColumnTarget::edge};
const ColumnSchema kEdgeVersion{"version", ColumnKind::int32, ColumnTarget::edge};
const ColumnSchema kEdgePayload{"payload", ColumnKind::varlen_ref, ColumnTarget::edge};

using Clock = std::chrono::steady_clock;

}  // namespace

const char* op_name(Op op) noexcept { return kOpNames[static_cast<std::size_t>(op)]; }

Op parse_op(std::string_view name) {
  for (std::size_t i = 0; i < kOpCount; ++i)
    if (name == kOpNames[i]) return static_cast<Op>(i);
  throw Error(Errc::invalid_argument, "unknown operation '" + std::string(name) + "'");
}

// LinkBench's default request shares, folded onto the eight operations here.
WorkloadSpec::WorkloadSpec() {
  auto set = [&](Op op, double w) { mix[static_cast<std::size_t>(op)] = w; };
  set(Op::node_get, 0.13);
  set(Op::node_insert, 0.045);
  set(Op::node_update, 0.075);
  set(Op::edge_insert_or_update, 0.09);
  set(Op::edge_delete, 0.03);
  set(Op::edge_update, 0.08);
  set(Op::edge_getrange, 0.40);
  set(Op::edge_outnbrs, 0.15);
}

void WorkloadSpec::validate() const {
  const auto bad = [](const std::string& m) { throw Error(Errc::invalid_argument, "workload: " + m); };
  double sum = 0;
  for (std::size_t i = 0; i < kOpCount; ++i) {
    if (!(mix[i] >= 0)) bad(std::string("negative weight for ") + kOpNames[i]);
    sum += mix[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) bad("weights sum to " + std::to_string(sum) + ", not 1");
  if (vertices < 2) bad("need at least two vertices");
  if (!(edges_per_vertex >= 0)) bad("edges_per_vertex must be non-negative");
  if (edge_types == 0 || edge_types > 15) bad("edge_types must lie in [1, 15]");
  if (threads == 0) bad("threads must be positive");
  if (duration_seconds < 0) bad("negative duration");
  if (range_window < 0) bad("negative range_window");
  if (range_limit == 0) bad("range_limit must be positive");
  for (const auto* p : {&node_payload, &edge_payload})
    if (!(p->sigma >= 0) || !std::isfinite(p->mu)) bad("bad payload length distribution");
}

std::uint64_t WorkloadSpec::first_new_node() const { return ceil_div(vertices, threads) * threads; }

std::uint64_t WorkloadSpec::required_max_id() const {
  // Duration runs have no op bound; leave room for as many inserts as the
  // seeded node count.
  const double share = weight(Op::node_insert);
  const std::uint64_t inserts =
      duration_seconds > 0 ? (share > 0 ? vertices : 0)
                           : static_cast<std::uint64_t>(std::ceil(double(ops) * share)) + ops / 10 + threads;
  return first_new_node() + (ceil_div(inserts, threads) + 1) * threads - 1;
}

WorkloadSpec WorkloadSpec::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("workload: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_argument, "workload: expected a JSON object");
  WorkloadSpec s;
  try {
    s.vertices = j.value("vertices", s.vertices);
    s.edges_per_vertex = j.value("edges_per_vertex", s.edges_per_vertex);
    s.random_targets = j.value("random_targets", s.random_targets);
    s.edge_types = j.value("edge_types", s.edge_types);
    s.threads = j.value("threads", s.threads);
    s.ops = j.value("ops", s.ops);
    s.duration_seconds = j.value("duration_seconds", s.duration_seconds);
    s.seed = j.value("seed", s.seed);
    s.range_window = j.value("range_window", s.range_window);
    s.range_limit = j.value("range_limit", s.range_limit);
    for (auto [key, field] : {std::pair{"node_payload", &s.node_payload}, {"edge_payload", &s.edge_payload}})
      if (j.contains(key)) {
        field->mu = j[key].value("mu", field->mu);
        field->sigma = j[key].value("sigma", field->sigma);
      }
    if (j.contains("mix")) {
      s.mix.fill(0.0);
      for (const auto& [name, w] : j["mix"].items()) s.mix[static_cast<std::size_t>(parse_op(name))] = w.get<double>();
    }
    for (const auto& [key, _] : j.items()) {
      static const std::vector<std::string> known = {
          "vertices", "edges_per_vertex", "random_targets", "edge_types", "threads",      "ops",
          "duration_seconds", "seed", "range_window", "range_limit", "node_payload", "edge_payload", "mix"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw Error(Errc::invalid_argument, "workload: unknown field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("workload: ") + e.what());
  }
  s.validate();
  return s;
}

std::string WorkloadSpec::to_json() const {
  nlohmann::json j;
  j["vertices"] = vertices;
  j["edges_per_vertex"] = edges_per_vertex;
  j["random_targets"] = random_targets;
  j["edge_types"] = edge_types;
  j["threads"] = threads;
  j["ops"] = ops;
  j["duration_seconds"] = duration_seconds;
  j["seed"] = seed;
  j["range_window"] = range_window;
  j["range_limit"] = range_limit;
  j["node_payload"] = {{"mu", node_payload.mu}, {"sigma", node_payload.sigma}};
  j["edge_payload"] = {{"mu", edge_payload.mu}, {"sigma", edge_payload.sigma}};
  for (std::size_t i = 0; i < kOpCount; ++i) j["mix"][kOpNames[i]] = mix[i];
  return j.dump(2);
}

double percentile(std::vector<double>& samples, double q) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * double(samples.size())));
  return samples[std::clamp<std::size_t>(rank, 1, samples.size()) - 1];
}

void LatencyReport::print_table(std::ostream& out) const {
  out << std::left << std::setw(24) << "operation" << std::right << std::setw(10) << "count"
      << std::setw(10) << "mean" << std::setw(10) << "p50" << std::setw(10) << "p75" << std::setw(10)
      << "p95" << std::setw(10) << "p99" << "   (ms)\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& o : ops)
    out << std::left << std::setw(24) << op_name(o.op) << std::right << std::setw(10) << o.count
        << std::setw(10) << o.mean_ms << std::setw(10) << o.p50_ms << std::setw(10) << o.p75_ms
        << std::setw(10) << o.p95_ms << std::setw(10) << o.p99_ms << '\n';
  out << std::setprecision(1) << "total " << total_ops << " ops in " << std::setprecision(3) << wall_seconds
      << " s, " << std::setprecision(1) << throughput << " ops/s\n";
  out << "io: seeks " << io.random_seeks << ", blocks " << io.sequential_blocks << ", read "
      << io.bytes_read << " B, written " << io.bytes_written << " B, edges rewritten " << io.edges_written
      << '\n';
  if (oracle_checks > 0)
    out << "shadow oracle: " << oracle_checks << " checks, " << oracle_mismatches << " mismatches\n";
  out << "trace hash " << std::hex << trace_hash << std::dec << '\n';
  out.unsetf(std::ios::floatfield);
}

void LatencyReport::write_csv(std::ostream& out) const {
  out << "op,count,mean_ms,p50_ms,p75_ms,p95_ms,p99_ms\n";
  out << std::setprecision(6);
  for (const auto& o : ops)
    out << op_name(o.op) << ',' << o.count << ',' << o.mean_ms << ',' << o.p50_ms << ',' << o.p75_ms << ','
        << o.p95_ms << ',' << o.p99_ms << '\n';
  out << "total," << total_ops << ",,,,,\n";
  out << "throughput_ops_per_s," << throughput << ",,,,,\n";
}

// --- data model ------------------------------------------------------------------

namespace {

struct EdgeAttrs {
  std::int64_t ts = 0;
  std::int32_t version = 0;
  std::string payload;
  friend auto operator<=>(const EdgeAttrs&, const EdgeAttrs&) = default;
};

struct NodeState {
  std::int64_t version = 0;
  std::string payload;
  friend bool operator==(const NodeState&, const NodeState&) = default;
};

using EdgeKey = std::tuple<std::uint64_t, std::uint64_t, std::uint8_t>;

/// The part of the model one thread owns.
struct Shadow {
  std::map<std::uint64_t, NodeState> nodes;
  std::map<EdgeKey, std::vector<EdgeAttrs>> edges;
};

class PayloadGen {
 public:
  explicit PayloadGen(PayloadLength p) : dist_(p.mu, p.sigma) {}
  template <typename Rng>
  std::string operator()(Rng& rng) {
    const double x = std::round(dist_(rng));
    const auto len = static_cast<std::size_t>(std::clamp(std::isfinite(x) ? x : 1024.0, 1.0, 1024.0));
    std::string s(len, 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
    return s;
  }

 private:
  std::lognormal_distribution<double> dist_;
};

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// The seeded graph and nodes, generated identically for the database and
/// the model.
template <typename NodeFn, typename EdgeFn>
void generate(const WorkloadSpec& spec, NodeFn&& node, EdgeFn&& edge) {
  auto rng = seeded(spec.seed, 0x5eed);
  PayloadGen node_payload(spec.node_payload), edge_payload(spec.edge_payload);
  for (std::uint64_t v = 0; v < spec.vertices; ++v) node(v, NodeState{1, node_payload(rng)});
  std::int64_t ts = 0;
  for (const auto& e : linkbench_graph(spec.vertices, spec.edges_per_vertex, spec.seed,
                                       spec.random_targets, spec.edge_types))
    edge(e, EdgeAttrs{++ts, 1, edge_payload(rng)});
}

std::int64_t seeded_edge_count(const WorkloadSpec& spec) {
  return static_cast<std::int64_t>(
      linkbench_graph(spec.vertices, spec.edges_per_vertex, spec.seed, spec.random_targets, spec.edge_types)
          .size());
}

void ensure_columns(Database& db) {
  for (const auto& c : {kNodePayload, kNodeVersion, kNodeTime, kEdgeTime, kEdgeVersion, kEdgePayload})
    db.ensure_column(c);
}

std::uint64_t fnv(std::uint64_t h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Sample {
  Op op;
  double ms;
};

struct RangeRow {
  std::uint64_t dst;
  std::uint8_t type;
  std::int64_t ts;
  friend auto operator<=>(const RangeRow&, const RangeRow&) = default;
};

/// Newest first; ties broken by the rest of the row so both sides agree.
void sort_by_time(std::vector<RangeRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const RangeRow& a, const RangeRow& b) {
    if (a.ts != b.ts) return a.ts > b.ts;
    return std::tie(a.dst, a.type) < std::tie(b.dst, b.type);
  });
}

class Worker {
 public:
  Worker(Database& db, const WorkloadSpec& spec, unsigned thread, std::int64_t first_ts, Shadow* shadow)
      : db_(db),
        spec_(spec),
        t_(thread),
        rng_(seeded(spec.seed, thread + 1)),
        node_payload_(spec.node_payload),
        edge_payload_(spec.edge_payload),
        first_ts_(first_ts),
        shadow_(shadow),
        pick_op_(spec.mix.begin(), spec.mix.end()),
        owned_seeded_(spec.vertices > thread ? ceil_div(spec.vertices - thread, spec.threads) : 0) {}

  void run(std::uint64_t ops, Clock::time_point deadline, bool timed) {
    for (std::uint64_t k = 0; timed ? Clock::now() < deadline : k < ops; ++k) {
      const Op op = static_cast<Op>(pick_op_(rng_));
      const auto start = Clock::now();
      TraceEntry e = execute(op, k);
      samples_.push_back({op, std::chrono::duration<double, std::milli>(Clock::now() - start).count()});
      e.op = op;
      e.thread = t_;
      trace_.push_back(e);
    }
  }

  std::vector<Sample>& samples() noexcept { return samples_; }
  std::vector<TraceEntry>& trace() noexcept { return trace_; }
  std::uint64_t checks() const noexcept { return checks_; }
  std::uint64_t mismatches() const noexcept { return mismatches_; }

 private:
  std::uint64_t any_vertex() {
    return std::uniform_int_distribution<std::uint64_t>(0, spec_.vertices - 1)(rng_);
  }
  std::uint8_t any_type() {
    return static_cast<std::uint8_t>(std::uniform_int_distribution<unsigned>(0, spec_.edge_types - 1)(rng_));
  }
  // Sources and nodes this thread writes: IDs congruent to t modulo threads.
  std::uint64_t owned_source() {
    return t_ + spec_.threads * std::uniform_int_distribution<std::uint64_t>(0, owned_seeded_ - 1)(rng_);
  }
  std::uint64_t owned_node() {
    const std::uint64_t k = std::uniform_int_distribution<std::uint64_t>(0, owned_seeded_ + inserted_ - 1)(rng_);
    return k < owned_seeded_ ? t_ + spec_.threads * k
                             : spec_.first_new_node() + t_ + spec_.threads * (k - owned_seeded_);
  }
  bool owns(std::uint64_t v) const { return v % spec_.threads == t_; }
  std::int64_t now(std::uint64_t k) const {
    return first_ts_ + static_cast<std::int64_t>(k * spec_.threads + t_);
  }

  void check(bool ok) {
    ++checks_;
    if (!ok) ++mismatches_;
  }

  std::optional<NodeState> read_node(std::uint64_t id) {
    const auto ref = db_.get_vertex_value<PayloadRef>(kNodePayload.name, OriginalId{id});
    if (ref.is_null()) return std::nullopt;
    return NodeState{db_.get_vertex_value<std::int64_t>(kNodeVersion.name, OriginalId{id}), db_.read_payload(ref)};
  }
  void write_node(std::uint64_t id, const NodeState& n, std::int64_t ts) {
    db_.set_vertex_value(kNodePayload.name, OriginalId{id}, db_.append_payload(n.payload));
    db_.set_vertex_value(kNodeVersion.name, OriginalId{id}, n.version);
    db_.set_vertex_value(kNodeTime.name, OriginalId{id}, ts);
  }

  /// Distinct (dst, type) keys of src's out-edges, sorted.
  std::vector<std::pair<std::uint64_t, std::uint8_t>> out_keys(std::uint64_t src) {
    std::vector<std::pair<std::uint64_t, std::uint8_t>> keys;
    for (const auto& e : db_.out_edges(OriginalId{src})) keys.emplace_back(raw(e.dst), e.type);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  }

  std::vector<RangeRow> out_rows(std::uint64_t src, TypeFilter filter) {
    std::vector<RangeRow> rows;
    const ReadView view = db_.read_view();
    const ColumnSchema& ts_col = view.schema().edge_column(kEdgeTime.name);
    std::vector<EdgeRecord> recs;
    view.out_edges(db_.ids().to_internal(OriginalId{src}), filter, nullptr, recs);
    for (const auto& r : recs) {
      std::int64_t ts = 0;
      view.read_edge_cell(ts_col, r.handle, &ts, nullptr);
      rows.push_back({raw(db_.ids().to_original(r.edge.dst)), r.edge.type, ts});
    }
    return rows;
  }
  std::vector<RangeRow> shadow_rows(std::uint64_t src, std::optional<std::uint8_t> type) const {
    std::vector<RangeRow> rows;
    for (auto it = shadow_->edges.lower_bound({src, 0, 0}); it != shadow_->edges.end() && std::get<0>(it->first) == src; ++it)
      if (!type || std::get<2>(it->first) == *type)
        for (const auto& a : it->second) rows.push_back({std::get<1>(it->first), std::get<2>(it->first), a.ts});
    return rows;
  }

  AttributeRow edge_row(const EdgeAttrs& a) {
    AttributeRow row = db_.new_row();
    row.set(kEdgeTime.name, a.ts).set(kEdgeVersion.name, a.version).set(kEdgePayload.name, db_.append_payload(a.payload));
    return row;
  }

  TraceEntry execute(Op op, std::uint64_t k) {
    TraceEntry tr;
    switch (op) {
      case Op::node_get: {
        const std::uint64_t id = std::uniform_int_distribution<std::uint64_t>(0, spec_.first_new_node() + inserted_ * spec_.threads - 1)(rng_);
        tr.a = id;
        const auto got = read_node(std::min(id, db_.ids().max_id()));
        if (shadow_ && owns(id)) {
          auto it = shadow_->nodes.find(id);
          check(it == shadow_->nodes.end() ? !got.has_value() : got && *got == it->second);
        }
        break;
      }
      case Op::node_insert: {
        const std::uint64_t id = spec_.first_new_node() + t_ + spec_.threads * inserted_;
        if (id > db_.ids().max_id()) throw Error(Errc::capacity, "bench: node IDs exhausted; raise max_id");
        ++inserted_;
        const NodeState n{1, node_payload_(rng_)};
        write_node(id, n, now(k));
        if (shadow_) shadow_->nodes[id] = n;
        tr.a = id;
        tr.payload_length = static_cast<std::uint32_t>(n.payload.size());
        break;
      }
      case Op::node_update: {
        const std::uint64_t id = owned_node();
        auto cur = read_node(id);
        NodeState n{cur ? cur->version + 1 : 1, node_payload_(rng_)};
        write_node(id, n, now(k));
        if (shadow_) {
          auto it = shadow_->nodes.find(id);
          check(it == shadow_->nodes.end() ? !cur.has_value() : cur && *cur == it->second);
          shadow_->nodes[id] = n;
        }
        tr.a = id;
        tr.payload_length = static_cast<std::uint32_t>(n.payload.size());
        break;
      }
      case Op::edge_insert_or_update: {
        const std::uint64_t src = owned_source();
        const std::uint64_t dst = spec_.random_targets
                                      ? any_vertex()
                                      : (src + 1 + std::geometric_distribution<std::uint64_t>(0.3)(rng_)) % spec_.vertices;
        const std::uint8_t type = any_type();
        const EdgeAttrs a{now(k), 1, edge_payload_(rng_)};
        db_.insert_or_update_edge(OriginalId{src}, OriginalId{dst}, type, edge_row(a));
        if (shadow_) {
          auto& copies = shadow_->edges[{src, dst, type}];
          if (copies.empty())
            copies.push_back(a);
          else
            std::fill(copies.begin(), copies.end(), a);
        }
        tr = {op, t_, src, dst, type, static_cast<std::uint32_t>(a.payload.size())};
        break;
      }
      case Op::edge_delete:
      case Op::edge_update: {
        const std::uint64_t src = owned_source();
        const auto keys = out_keys(src);
        tr.a = src;
        const auto shadow_keys = [&] {
          std::vector<std::pair<std::uint64_t, std::uint8_t>> s;
          for (auto it = shadow_->edges.lower_bound({src, 0, 0}); it != shadow_->edges.end() && std::get<0>(it->first) == src; ++it)
            s.emplace_back(std::get<1>(it->first), std::get<2>(it->first));
          return s;
        };
        if (shadow_) check(keys == shadow_keys());
        if (keys.empty()) {
          tr.b = UINT64_MAX;
          break;
        }
        const auto [dst, type] = keys[std::uniform_int_distribution<std::size_t>(0, keys.size() - 1)(rng_)];
        tr.b = dst;
        tr.type = type;
        if (op == Op::edge_delete) {
          db_.delete_edge(OriginalId{src}, OriginalId{dst}, type);
          if (shadow_) shadow_->edges.erase({src, dst, type});
          break;
        }
        std::int32_t version = 0;
        {
          const ReadView view = db_.read_view();
          const ColumnSchema& col = view.schema().edge_column(kEdgeVersion.name);
          std::vector<EdgeRecord> recs;
          view.out_edges(db_.ids().to_internal(OriginalId{src}), TypeFilter::only(type), nullptr, recs);
          const InternalId want = db_.ids().to_internal(OriginalId{dst});
          for (const auto& r : recs) {
            if (r.edge.dst != want) continue;
            std::int32_t v = 0;
            view.read_edge_cell(col, r.handle, &v, nullptr);
            version = std::max(version, v);
          }
        }
        const EdgeAttrs a{now(k), version + 1, edge_payload_(rng_)};
        db_.insert_or_update_edge(OriginalId{src}, OriginalId{dst}, type, edge_row(a));
        tr.payload_length = static_cast<std::uint32_t>(a.payload.size());
        if (shadow_) {
          auto& copies = shadow_->edges[{src, dst, type}];
          std::int32_t expect = 0;
          for (const auto& c : copies) expect = std::max(expect, c.version);
          check(expect == version);
          std::fill(copies.begin(), copies.end(), a);
        }
        break;
      }
      case Op::edge_getrange: {
        const std::uint64_t src = any_vertex();
        const std::uint8_t type = any_type();
        const std::int64_t hi = now(k);
        const std::int64_t lo = spec_.range_window > 0 ? hi - spec_.range_window : INT64_MIN;
        auto select = [&](std::vector<RangeRow> rows) {
          std::erase_if(rows, [&](const RangeRow& r) { return r.ts < lo || r.ts > hi; });
          sort_by_time(rows);
          if (rows.size() > spec_.range_limit) rows.resize(spec_.range_limit);
          return rows;
        };
        const auto rows = select(out_rows(src, TypeFilter::only(type)));
        if (shadow_ && owns(src)) check(rows == select(shadow_rows(src, type)));
        tr.a = src;
        tr.type = type;
        break;
      }
      case Op::edge_outnbrs: {
        const std::uint64_t src = any_vertex();
        auto rows = out_rows(src, TypeFilter::any());
        sort_by_time(rows);
        if (shadow_ && owns(src)) {
          auto expect = shadow_rows(src, std::nullopt);
          sort_by_time(expect);
          check(rows == expect);
        }
        tr.a = src;
        break;
      }
    }
    return tr;
  }

  Database& db_;
  const WorkloadSpec& spec_;
  std::uint32_t t_;
  std::mt19937_64 rng_;
  PayloadGen node_payload_, edge_payload_;
  std::int64_t first_ts_;
  Shadow* shadow_;
  std::discrete_distribution<std::size_t> pick_op_;
  std::uint64_t owned_seeded_;
  std::uint64_t inserted_ = 0;
  std::vector<Sample> samples_;
  std::vector<TraceEntry> trace_;
  std::uint64_t checks_ = 0;
  std::uint64_t mismatches_ = 0;
};

/// Compares the whole database with the model; returns the mismatch count.
std::uint64_t compare_final(const Database& db, const WorkloadSpec& spec, const std::vector<Shadow>& shadows,
                            std::uint64_t& checks) {
  std::uint64_t bad = 0;
  const ReadView view = db.read_view();
  const ColumnSchema& ts_col = view.schema().edge_column(kEdgeTime.name);
  const ColumnSchema& ver_col = view.schema().edge_column(kEdgeVersion.name);
  const ColumnSchema& pay_col = view.schema().edge_column(kEdgePayload.name);
  std::vector<EdgeRecord> recs;
  for (std::uint64_t v = 0; v <= db.ids().max_id(); ++v) {
    const Shadow& sh = shadows[v % spec.threads];
    ++checks;
    const auto ref = db.get_vertex_value<PayloadRef>(kNodePayload.name, OriginalId{v});
    const auto it = sh.nodes.find(v);
    if (it == sh.nodes.end()) {
      if (!ref.is_null()) ++bad;
    } else if (ref.is_null() ||
               NodeState{db.get_vertex_value<std::int64_t>(kNodeVersion.name, OriginalId{v}), db.read_payload(ref)} !=
                   it->second) {
      ++bad;
    }

    ++checks;
    recs.clear();
    view.out_edges(db.ids().to_internal(OriginalId{v}), TypeFilter::any(), nullptr, recs);
    std::vector<std::tuple<std::uint64_t, std::uint8_t, EdgeAttrs>> got, want;
    for (const auto& r : recs) {
      EdgeAttrs a;
      PayloadRef p;
      view.read_edge_cell(ts_col, r.handle, &a.ts, nullptr);
      view.read_edge_cell(ver_col, r.handle, &a.version, nullptr);
      view.read_edge_cell(pay_col, r.handle, &p, nullptr);
      a.payload = p.is_null() ? std::string() : db.read_payload(p);
      got.emplace_back(raw(db.ids().to_original(r.edge.dst)), r.edge.type, std::move(a));
    }
    for (auto e = sh.edges.lower_bound({v, 0, 0}); e != sh.edges.end() && std::get<0>(e->first) == v; ++e)
      for (const auto& a : e->second) want.emplace_back(std::get<1>(e->first), std::get<2>(e->first), a);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) ++bad;
  }
  return bad;
}

}  // namespace

void seed(Database& db, const WorkloadSpec& spec) {
  spec.validate();
  if (db.ids().max_id() < spec.required_max_id())
    throw Error(Errc::invalid_argument, "bench: database max_id " + std::to_string(db.ids().max_id()) +
                                            " is below the " + std::to_string(spec.required_max_id()) +
                                            " this workload needs");
  ensure_columns(db);
  generate(
      spec, [&](std::uint64_t v, const NodeState& n) {
        db.set_vertex_value(kNodePayload.name, OriginalId{v}, db.append_payload(n.payload));
        db.set_vertex_value(kNodeVersion.name, OriginalId{v}, n.version);
        db.set_vertex_value(kNodeTime.name, OriginalId{v}, std::int64_t{0});
      },
      [&](const GenEdge& e, const EdgeAttrs& a) {
        AttributeRow row = db.new_row();
        row.set(kEdgeTime.name, a.ts).set(kEdgeVersion.name, a.version).set(kEdgePayload.name, db.append_payload(a.payload));
        db.insert_edge(OriginalId{e.src}, OriginalId{e.dst}, e.type, &row);
      });
}

LatencyReport run(Database& db, const WorkloadSpec& spec, const RunOptions& opts) {
  spec.validate();
  if (db.ids().max_id() < spec.required_max_id())
    throw Error(Errc::invalid_argument, "bench: database max_id is below what this workload needs");
  ensure_columns(db);

  std::vector<Shadow> shadows;
  if (opts.shadow_oracle) {
    shadows.resize(spec.threads);
    generate(
        spec, [&](std::uint64_t v, const NodeState& n) { shadows[v % spec.threads].nodes[v] = n; },
        [&](const GenEdge& e, const EdgeAttrs& a) {
          shadows[e.src % spec.threads].edges[{e.src, e.dst, e.type}].push_back(a);
        });
  }

  const std::int64_t first_ts = seeded_edge_count(spec) + 1;
  std::vector<std::unique_ptr<Worker>> workers;
  for (unsigned t = 0; t < spec.threads; ++t)
    workers.push_back(std::make_unique<Worker>(db, spec, t, first_ts, opts.shadow_oracle ? &shadows[t] : nullptr));

  const IoCounters io_before = db.io().counters();
  const bool timed = spec.duration_seconds > 0;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(spec.duration_seconds));
  std::vector<std::exception_ptr> errors(spec.threads);
  {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < spec.threads; ++t)
      pool.emplace_back([&, t] {
        try {
          const std::uint64_t n = spec.ops / spec.threads + (t < spec.ops % spec.threads ? 1 : 0);
          workers[t]->run(n, deadline, timed);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
  }
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  LatencyReport rep;
  rep.wall_seconds = wall;
  rep.io = db.io().counters() - io_before;
  std::array<std::vector<double>, kOpCount> per_op;
  rep.trace_hash = 0xcbf29ce484222325ULL;
  for (auto& w : workers) {
    for (const auto& s : w->samples()) per_op[static_cast<std::size_t>(s.op)].push_back(s.ms);
    for (const auto& e : w->trace()) {
      for (std::uint64_t x : {std::uint64_t(e.op), std::uint64_t(e.thread), e.a, e.b, std::uint64_t(e.type),
                              std::uint64_t(e.payload_length)})
        rep.trace_hash = fnv(rep.trace_hash, x);
    }
    rep.oracle_checks += w->checks();
    rep.oracle_mismatches += w->mismatches();
    if (opts.keep_trace && opts.trace) opts.trace->insert(opts.trace->end(), w->trace().begin(), w->trace().end());
  }
  for (std::size_t i = 0; i < kOpCount; ++i) {
    auto& s = per_op[i];
    if (s.empty()) continue;
    OpLatency o;
    o.op = static_cast<Op>(i);
    o.count = s.size();
    o.mean_ms = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
    o.p50_ms = percentile(s, 0.50);
    o.p75_ms = percentile(s, 0.75);
    o.p95_ms = percentile(s, 0.95);
    o.p99_ms = percentile(s, 0.99);
    rep.total_ops += o.count;
    rep.ops.push_back(o);
  }
  rep.throughput = wall > 0 ? double(rep.total_ops) / wall : 0;
  if (opts.shadow_oracle) rep.oracle_mismatches += compare_final(db, spec, shadows, rep.oracle_checks);
  return rep;
}

}  // namespace palgraph::bench
