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

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "palgraph/bench.hpp"
#include "palgraph/compute.hpp"
#include "palgraph/database.hpp"
#include "palgraph/ingest.hpp"
#include "palgraph/query.hpp"

namespace {

using namespace palgraph;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCorrupt = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path db_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PALGRAPH_DIR"); env && *env) return env;
  throw UsageError("no database directory: set PALGRAPH_DIR or pass --dir");
}

std::unique_ptr<Database> open_db(const fs::path& root) {
  if (!Database::exists(root)) throw UsageError("no database at " + root.string() + "; run 'palgraph init' first");
  RuntimeOptions opts;
  return Database::open(root, opts);
}

OriginalId vertex(const Database& db, std::uint64_t v) {
  if (v > db.ids().max_id())
    throw Error(Errc::out_of_range,
                "vertex " + std::to_string(v) + " not found (max_id is " + std::to_string(db.ids().max_id()) + ")");
  return OriginalId{v};
}

void print_stats(const Database& db, std::ostream& out) {
  const DbStats s = db.stats();
  const DbConfig& c = db.config();
  out << "max_id " << c.max_id << ", partitions " << c.partitions << ", branching " << c.branching << ", layout "
      << (c.lsm ? "lsm" : "flat") << ", durable buffers " << (c.durable_buffers ? "on" : "off") << ", out index "
      << index_kind_name(c.out_index) << '\n';
  out << "generation " << s.generation << ", levels " << s.levels.size() << '\n';
  std::uint64_t file = 0, mem = 0, rawb = 0;
  for (const auto& l : s.levels) {
    out << "level " << l.level << ": " << l.nonempty << "/" << l.slots << " partitions, " << l.edges << " edges, "
        << l.edge_bytes << " edge bytes, out-index " << l.out_index_file_bytes << " B on disk / "
        << l.out_index_memory_bytes << " B in memory / " << l.out_index_raw_bytes << " B raw, in-index "
        << l.in_index_bytes << " B\n";
    file += l.out_index_file_bytes;
    mem += l.out_index_memory_bytes;
    rawb += l.out_index_raw_bytes;
  }
  out << "stored edges " << s.stored_edges() << " (partitions, tombstones included)\n";
  out << "out-index total " << file << " B compressed vs " << rawb << " B raw";
  if (rawb > 0) out << " (" << std::fixed << std::setprecision(1) << 100.0 * double(file) / double(rawb) << "%)";
  out.unsetf(std::ios::floatfield);
  out << ", " << mem << " B resident\n";
  out << "buffers " << s.buffered_live << " live / " << s.buffered_slots << " slots, capacity " << s.buffer_capacity
      << '\n';
  out << "since open: flushes " << s.flushes << ", downstream merges " << s.downstream_merges << ", wal syncs " << s.wal_syncs
      << ", payload log " << s.payload_bytes << " B\n";
  out << "io: seeks " << s.io.random_seeks << ", blocks " << s.io.sequential_blocks << ", edges rewritten "
      << s.io.edges_written << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"palgraph: embedded graph database"};
  app.require_subcommand(1);
  std::string dir;
  app.add_option("--dir", dir, "database directory (default: $PALGRAPH_DIR)");

  // init
  auto* init = app.add_subcommand("init", "create an empty database");
  DbConfig cfg;
  std::string out_index = "gamma";
  bool durable = false, flat = false;
  init->add_option("--max-id", cfg.max_id, "largest vertex ID")->required();
  init->add_option("--partitions", cfg.partitions, "vertex intervals P")->required();
  init->add_option("--branching", cfg.branching, "LSM fan-out f")->capture_default_str();
  init->add_option("--buffer-capacity", cfg.buffer_capacity, "edges buffered before a flush")->capture_default_str();
  init->add_option("--max-partition-edges", cfg.max_partition_edges, "partition size that triggers a push down")
      ->capture_default_str();
  init->add_option("--out-index", out_index, "gamma, sparse or binary")->capture_default_str();
  init->add_flag("--durable", durable, "log buffered edges to a write-ahead log");
  init->add_flag("--flat", flat, "single level of P partitions instead of the LSM tree");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "insert edges from a file ('-' for stdin)");
  std::string ingest_file, ingest_csv;
  IngestOptions iopts;
  bool binary = false;
  ingest->add_option("file", ingest_file, "edge list: 'src dst [type]' lines")->required();
  ingest->add_flag("--dedup", iopts.dedup, "skip edges that already exist");
  ingest->add_flag("--strict", iopts.strict, "fail on the first malformed line");
  ingest->add_flag("--binary", binary, "input is little-endian u64 pairs");
  ingest->add_option("--csv", ingest_csv, "write the throughput time series here");
  ingest->add_option("--bucket-seconds", iopts.bucket_seconds, "throughput bucket width")->capture_default_str();

  // query
  auto* query = app.add_subcommand("query", "online queries");
  query->require_subcommand(1);
  std::uint64_t qa = 0, qb = 0, cap = query::kDefaultFanoutCap;
  unsigned max_hops = query::kDefaultMaxHops;
  int qtype = -1;
  auto* q_out = query->add_subcommand("out", "out-edges of a vertex");
  auto* q_in = query->add_subcommand("in", "in-edges of a vertex");
  for (auto* q : {q_out, q_in}) {
    q->add_option("vertex", qa)->required();
    q->add_option("--type", qtype, "only this edge type");
  }
  auto* q_fof = query->add_subcommand("fof", "friends of friends");
  q_fof->add_option("vertex", qa)->required();
  q_fof->add_option("--cap", cap, "friends expanded")->capture_default_str();
  auto* q_sp = query->add_subcommand("sp", "shortest directed path length");
  q_sp->add_option("from", qa)->required();
  q_sp->add_option("to", qb)->required();
  q_sp->add_option("--max-hops", max_hops)->capture_default_str();

  // compute
  auto* comp = app.add_subcommand("compute", "whole-graph programs");
  comp->require_subcommand(1);
  compute::PagerankOptions pr;
  bool edge_centric = false;
  std::size_t top = 10;
  std::string cc_column = "component";
  unsigned cc_iters = 1000;
  auto* c_pr = comp->add_subcommand("pagerank", "damped Pagerank into a vertex column");
  c_pr->add_option("--iters", pr.iterations)->capture_default_str();
  c_pr->add_option("--damping", pr.damping)->capture_default_str();
  c_pr->add_option("--column", pr.column)->capture_default_str();
  c_pr->add_flag("--edge-centric", edge_centric, "stream edges instead of sliding windows");
  c_pr->add_option("--top", top, "print the highest ranks")->capture_default_str();
  auto* c_cc = comp->add_subcommand("cc", "connected components into a vertex column");
  c_cc->add_option("--iters", cc_iters, "iteration limit")->capture_default_str();
  c_cc->add_option("--column", cc_column)->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "LinkBench-style request mix");
  std::string spec_file, bench_csv;
  unsigned threads = 0;
  std::uint64_t seed = 0, ops = 0;
  bool shadow = false;
  std::uint32_t bench_partitions = 16;
  bench_cmd->add_option("--spec", spec_file, "workload JSON (defaults apply when omitted)");
  bench_cmd->add_option("--threads", threads, "override the workload's thread count");
  bench_cmd->add_option("--seed", seed, "override the workload's seed");
  bench_cmd->add_option("--ops", ops, "override the workload's operation count");
  bench_cmd->add_flag("--shadow-oracle", shadow, "check every result against an in-memory model");
  bench_cmd->add_option("--csv", bench_csv, "write the latency report as CSV");
  bench_cmd->add_option("--partitions", bench_partitions, "P when the bench creates the database")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "partition, index and buffer summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const fs::path root = db_root(dir);

  if (*init) {
    cfg.lsm = !flat;
    cfg.durable_buffers = durable;
    cfg.out_index = parse_index_kind(out_index);
    Database::create(root, cfg)->close();
    std::cout << "created " << root.string() << '\n';
    return kExitOk;
  }
  if (*ingest) {
    auto db = open_db(root);
    iopts.format = binary ? EdgeFileFormat::binary : EdgeFileFormat::text;
    iopts.on_malformed = [](std::uint64_t, const std::string& what) { std::cerr << "warning: " << what << '\n'; };
    IngestReport rep;
    if (ingest_file == "-") {
      rep = ingest_edges(*db, std::cin, iopts);
    } else {
      std::ifstream in(ingest_file, std::ios::binary);
      if (!in) throw Error(Errc::io, "cannot read " + ingest_file);
      rep = ingest_edges(*db, in, iopts);
    }
    db->close();
    std::cout << "inserted " << rep.inserted << " edges from " << rep.lines << " records in " << rep.seconds
              << " s (" << static_cast<std::uint64_t>(rep.edges_per_second()) << " edges/s); " << rep.duplicates
              << " duplicates skipped, " << rep.malformed << " malformed; " << rep.io.edges_written
              << " edges rewritten, " << rep.io.bytes_written << " bytes written\n";
    if (!ingest_csv.empty()) {
      std::ofstream csv(ingest_csv);
      rep.write_csv(csv);
    }
    return kExitOk;
  }
  if (*query) {
    auto db = open_db(root);
    if (*q_out || *q_in) {
      if (qtype >= static_cast<int>(kTombstoneType)) throw UsageError("--type must lie in [0, 14]");
      const TypeFilter f = qtype < 0 ? TypeFilter::any() : TypeFilter::only(static_cast<std::uint8_t>(qtype));
      const OriginalId u = vertex(*db, qa);
      const auto edges = *q_out ? db->out_edges(u, f) : db->in_edges(u, f);
      for (const auto& e : edges) std::cout << raw(e.src) << ' ' << raw(e.dst) << ' ' << unsigned{e.type} << '\n';
    } else if (*q_fof) {
      for (auto v : query::friends_of_friends(*db, vertex(*db, qa), cap)) std::cout << raw(v) << '\n';
    } else {
      const auto hops = query::shortest_path(*db, vertex(*db, qa), vertex(*db, qb), max_hops);
      if (hops)
        std::cout << *hops << '\n';
      else
        std::cout << "no path within " << max_hops << " hops\n";
    }
    return kExitOk;
  }
  if (*comp) {
    auto db = open_db(root);
    const IoCounters before = db->io().counters();
    if (*c_pr) {
      compute::RunStats rs;
      if (edge_centric)
        compute::pagerank_edge_centric(*db, pr, &rs);
      else
        rs = compute::pagerank_psw(*db, pr);
      std::vector<std::pair<double, std::uint64_t>> ranked;
      for (std::uint64_t v = 0; v <= db->ids().max_id(); ++v)
        ranked.emplace_back(db->get_vertex_value<double>(pr.column, OriginalId{v}), v);
      top = std::min(top, ranked.size());
      std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), ranked.end(),
                        [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
      std::cout << "pagerank (" << (edge_centric ? "edge-centric" : "psw") << ") into column '" << pr.column
                << "', " << rs.iterations << " passes\n";
      std::cout << std::setprecision(9);
      for (std::size_t i = 0; i < top; ++i) std::cout << ranked[i].second << ' ' << ranked[i].first << '\n';
    } else {
      const auto rs = compute::connected_components(*db, cc_column, cc_iters);
      std::map<std::int64_t, std::uint64_t> sizes;
      for (std::uint64_t v = 0; v <= db->ids().max_id(); ++v) ++sizes[db->get_vertex_value<std::int64_t>(cc_column, OriginalId{v})];
      std::cout << sizes.size() << " components in column '" << cc_column << "' after " << rs.iterations
                << " iterations\n";
    }
    const IoCounters io = db->io().counters() - before;
    std::cout << "io: seeks " << io.random_seeks << ", blocks " << io.sequential_blocks << ", read " << io.bytes_read
              << " B, written " << io.bytes_written << " B\n";
    db->close();
    return kExitOk;
  }
  if (*bench_cmd) {
    bench::WorkloadSpec spec;
    if (!spec_file.empty()) {
      std::ifstream in(spec_file);
      if (!in) throw Error(Errc::io, "cannot read " + spec_file);
      std::stringstream ss;
      ss << in.rdbuf();
      spec = bench::WorkloadSpec::from_json(ss.str());
    }
    if (threads > 0) spec.threads = threads;
    if (bench_cmd->count("--seed") > 0) spec.seed = seed;
    if (ops > 0) spec.ops = ops;
    spec.validate();

    std::unique_ptr<Database> db;
    bool fresh = false;
    if (!Database::exists(root)) {
      DbConfig bc;
      bc.max_id = spec.required_max_id();
      bc.partitions = bench_partitions;
      bc.buffer_capacity = std::max<std::uint64_t>(10'000, static_cast<std::uint64_t>(double(spec.vertices) * spec.edges_per_vertex / 20));
      RuntimeOptions ro;
      ro.sync_partitions = false;
      db = Database::create(root, bc, ro);
      fresh = true;
    } else {
      db = open_db(root);
      fresh = db->stats().stored_edges() == 0 && db->buffered_edges() == 0;
    }
    if (shadow && !fresh) throw UsageError("--shadow-oracle needs a fresh database for the model to match");
    if (fresh) {
      std::cerr << "seeding " << spec.vertices << " nodes and about "
                << static_cast<std::uint64_t>(double(spec.vertices) * spec.edges_per_vertex) << " edges\n";
      bench::seed(*db, spec);
    }
    bench::RunOptions ro;
    ro.shadow_oracle = shadow;
    const auto rep = bench::run(*db, spec, ro);
    rep.print_table(std::cout);
    if (!bench_csv.empty()) {
      std::ofstream csv(bench_csv);
      rep.write_csv(csv);
    }
    db->close();
    if (shadow && rep.oracle_mismatches > 0) {
      std::cerr << "shadow oracle found " << rep.oracle_mismatches << " mismatches\n";
      return kExitData;
    }
    return kExitOk;
  }
  if (*stats) {
    auto db = open_db(root);
    print_stats(*db, std::cout);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "palgraph: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "palgraph: " << e.what() << '\n';
    return e.code() == Errc::corruption ? kExitCorrupt : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "palgraph: " << e.what() << '\n';
    return kExitData;
  }
}
