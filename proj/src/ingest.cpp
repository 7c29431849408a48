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

#include "palgraph/ingest.hpp"

#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace palgraph {

void IngestReport::write_csv(std::ostream& out) const {
  out << "elapsed_s,edges_total,edges_per_s\n";
  for (const auto& b : buckets) out << b.elapsed_seconds << ',' << b.edges_total << ',' << b.edges_per_second << '\n';
}

namespace {

bool exists(const Database& db, std::uint64_t src, std::uint64_t dst, std::uint8_t type) {
  for (const auto& e : db.out_edges(OriginalId{src}, TypeFilter::only(type)))
    if (raw(e.dst) == dst) return true;
  return false;
}

bool parse_line(const std::string& line, std::uint64_t& s, std::uint64_t& d, unsigned& t, bool& blank) {
  std::istringstream in(line.substr(0, line.find('#')));
  blank = false;
  std::string first;
  if (!(in >> first)) {
    blank = true;
    return true;
  }
  std::istringstream fs(first);
  if (!(fs >> s) || !fs.eof() || first[0] == '-') return false;
  std::string rest;
  if (!(in >> rest)) return false;
  std::istringstream ds(rest);
  if (!(ds >> d) || !ds.eof() || rest[0] == '-') return false;
  t = 0;
  std::string ty;
  if (in >> ty) {
    std::istringstream ts(ty);
    if (!(ts >> t) || !ts.eof() || ty[0] == '-') return false;
  }
  std::string extra;
  return !(in >> extra);
}

}  // namespace

IngestReport ingest_edges(Database& db, std::istream& in, const IngestOptions& opts) {
  using Clock = std::chrono::steady_clock;
  IngestReport rep;
  const IoCounters io0 = db.io().counters();
  const auto start = Clock::now();
  auto bucket_start = start;
  std::uint64_t bucket_edges = 0;

  const auto tick = [&](bool final) {
    const auto now = Clock::now();
    const double span = std::chrono::duration<double>(now - bucket_start).count();
    if (!final && span < opts.bucket_seconds) return;
    if (final && bucket_edges == 0 && !rep.buckets.empty()) return;
    rep.buckets.push_back({std::chrono::duration<double>(now - start).count(), rep.inserted,
                           span > 0 ? double(bucket_edges) / span : 0});
    bucket_start = now;
    bucket_edges = 0;
  };
  const auto bad = [&](const std::string& what) {
    if (opts.strict) throw Error(Errc::invalid_argument, what);
    ++rep.malformed;
    if (opts.on_malformed) opts.on_malformed(rep.lines, what);
  };
  const auto add = [&](std::uint64_t s, std::uint64_t d, unsigned t) {
    if (s > db.ids().max_id() || d > db.ids().max_id()) {
      bad("line " + std::to_string(rep.lines) + ": vertex ID above max_id " + std::to_string(db.ids().max_id()));
      return;
    }
    if (t >= kTombstoneType) {
      bad("line " + std::to_string(rep.lines) + ": edge type " + std::to_string(t) + " outside [0, 14]");
      return;
    }
    const auto type = static_cast<std::uint8_t>(t);
    if (opts.dedup && exists(db, s, d, type)) {
      ++rep.duplicates;
      return;
    }
    db.insert_edge(OriginalId{s}, OriginalId{d}, type);
    ++rep.inserted;
    ++bucket_edges;
    if ((rep.inserted & 1023) == 0) tick(false);
  };

  if (opts.format == EdgeFileFormat::text) {
    std::string line;
    while (std::getline(in, line)) {
      ++rep.lines;
      std::uint64_t s = 0, d = 0;
      unsigned t = 0;
      bool blank = false;
      if (!parse_line(line, s, d, t, blank)) {
        bad("line " + std::to_string(rep.lines) + ": expected 'src dst [type]'");
        continue;
      }
      if (!blank) add(s, d, t);
    }
  } else {
    unsigned char buf[16];
    while (in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
      ++rep.lines;
      std::uint64_t s = 0, d = 0;
      for (int i = 7; i >= 0; --i) {
        s = (s << 8) | buf[i];
        d = (d << 8) | buf[8 + i];
      }
      add(s, d, 0);
    }
    if (in.gcount() != 0) {
      ++rep.lines;
      bad("trailing " + std::to_string(in.gcount()) + " bytes do not form a pair");
    }
  }
  tick(true);
  rep.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  rep.io = db.io().counters() - io0;
  return rep;
}

}  // namespace palgraph
