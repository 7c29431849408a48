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

#include "test_support.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdlib>

namespace palgraph::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const char* base = std::getenv("TMPDIR");
  path_ = fs::path(base != nullptr ? base : "/tmp") /
          ("palgraph-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<Triple> EdgeOracle::out(std::uint64_t s) const {
  std::vector<Triple> r;
  for (auto it = edges_.lower_bound({s, 0, 0}); it != edges_.end() && std::get<0>(it->first) == s; ++it)
    for (std::uint64_t i = 0; i < it->second; ++i) r.push_back(it->first);
  return r;
}

std::vector<Triple> EdgeOracle::in(std::uint64_t d) const {
  std::vector<Triple> r;
  for (auto it = rev_.lower_bound({d, 0, 0}); it != rev_.end() && std::get<0>(it->first) == d; ++it)
    for (std::uint64_t i = 0; i < it->second; ++i)
      r.emplace_back(std::get<1>(it->first), d, std::get<2>(it->first));
  std::sort(r.begin(), r.end());
  return r;
}

std::uint64_t EdgeOracle::size() const {
  std::uint64_t n = 0;
  for (const auto& [k, c] : edges_) n += c;
  return n;
}

std::vector<Triple> sorted_triples(const std::vector<Edge>& edges) {
  std::vector<Triple> r;
  r.reserve(edges.size());
  for (const auto& e : edges) r.emplace_back(raw(e.src), raw(e.dst), e.type);
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace palgraph::testing
