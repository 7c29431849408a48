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
#include <iosfwd>
#include <random>
#include <vector>

namespace palgraph {

struct GenEdge {
  std::uint64_t src = 0;
  std::uint64_t dst = 0;
  std::uint8_t type = 0;
  friend bool operator==(const GenEdge&, const GenEdge&) = default;
};

/// Rank-frequency Zipf sampler over [0, n): P(k) roughly proportional to
/// (k + 1)^-exponent, by inverting the continuous CDF. exponent in (0, 1).
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double exponent);
  template <typename Rng>
  std::uint64_t operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return from_uniform(u);
  }
  std::uint64_t from_uniform(double u) const;

 private:
  std::uint64_t n_;
  double exponent_;
  double span_;
};

/// Directed graph over original IDs [0, vertices) whose out- and in-degrees
/// follow a power law. Hub IDs are scattered by a seeded permutation.
/// Self-loops are allowed; types are uniform in [0, types).
std::vector<GenEdge> power_law_graph(std::uint64_t vertices, std::uint64_t edges,
                                     std::uint64_t seed, unsigned types = 1,
                                     double exponent = 0.9);

/// Each vertex u links to u+1, u+2, ... (mod vertices) for a power-law
/// distributed out-degree with the given mean; `random_targets` draws the
/// targets uniformly instead to remove the locality.
std::vector<GenEdge> linkbench_graph(std::uint64_t vertices, double mean_degree,
                                     std::uint64_t seed, bool random_targets, unsigned types = 1);

/// Writes "src dst type" lines.
void write_edge_list(std::ostream& out, const std::vector<GenEdge>& edges);

}  // namespace palgraph
