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

#include "palgraph/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "palgraph/core.hpp"

namespace palgraph {

ZipfSampler::ZipfSampler(std::uint64_t n, double exponent) : n_(n), exponent_(exponent) {
  if (n == 0) throw Error(Errc::invalid_argument, "zipf: empty range");
  if (!(exponent > 0.0 && exponent < 1.0))
    throw Error(Errc::invalid_argument, "zipf: exponent must lie in (0, 1)");
  span_ = std::pow(static_cast<double>(n) + 1.0, 1.0 - exponent) - 1.0;
}

std::uint64_t ZipfSampler::from_uniform(double u) const {
  // CDF of x^-a on [1, n+1) inverted, shifted to start at 0.
  const double x = std::pow(u * span_ + 1.0, 1.0 / (1.0 - exponent_)) - 1.0;
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(x), n_ - 1);
}

namespace {

std::vector<std::uint64_t> permutation(std::uint64_t n, std::mt19937_64& rng) {
  std::vector<std::uint64_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

std::vector<GenEdge> power_law_graph(std::uint64_t vertices, std::uint64_t edges,
                                     std::uint64_t seed, unsigned types, double exponent) {
  if (types == 0 || types > 15) throw Error(Errc::invalid_argument, "types must lie in [1, 15]");
  std::mt19937_64 rng(seed);
  const auto out_perm = permutation(vertices, rng);
  const auto in_perm = permutation(vertices, rng);
  const ZipfSampler zipf(vertices, exponent);
  std::uniform_int_distribution<unsigned> type_dist(0, types - 1);
  std::vector<GenEdge> out;
  out.reserve(edges);
  for (std::uint64_t i = 0; i < edges; ++i) {
    const std::uint64_t s = out_perm[zipf(rng)];
    const std::uint64_t d = in_perm[zipf(rng)];
    out.push_back({s, d, static_cast<std::uint8_t>(type_dist(rng))});
  }
  return out;
}

std::vector<GenEdge> linkbench_graph(std::uint64_t vertices, double mean_degree,
                                     std::uint64_t seed, bool random_targets, unsigned types) {
  if (vertices < 2) throw Error(Errc::invalid_argument, "need at least two vertices");
  if (types == 0 || types > 15) throw Error(Errc::invalid_argument, "types must lie in [1, 15]");
  std::mt19937_64 rng(seed);
  // Degrees from a Pareto with shape 2 scaled to the requested mean.
  const double shape = 2.0;
  const double scale = mean_degree * (shape - 1.0) / shape;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> any(0, vertices - 1);
  std::uniform_int_distribution<unsigned> type_dist(0, types - 1);
  std::vector<GenEdge> out;
  out.reserve(static_cast<std::size_t>(mean_degree * static_cast<double>(vertices) * 1.1));
  for (std::uint64_t u = 0; u < vertices; ++u) {
    const double x = scale / std::sqrt(1.0 - unit(rng));
    const auto degree = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::llround(x)), vertices - 1);
    for (std::uint64_t k = 1; k <= degree; ++k) {
      const std::uint64_t d = random_targets ? any(rng) : (u + k) % vertices;
      out.push_back({u, d, static_cast<std::uint8_t>(type_dist(rng))});
    }
  }
  return out;
}

void write_edge_list(std::ostream& out, const std::vector<GenEdge>& edges) {
  for (const auto& e : edges) out << e.src << ' ' << e.dst << ' ' << unsigned{e.type} << '\n';
}

}  // namespace palgraph
