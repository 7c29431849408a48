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
#include <optional>
#include <vector>

#include "palgraph/database.hpp"
#include "palgraph/frontier.hpp"

namespace palgraph::query {

enum class Direction : std::uint8_t { out, in };
enum class Strategy : std::uint8_t { automatic, top_down, bottom_up };

/// Destinations of the out-edges (sources of the in-edges for
/// Direction::in) of every frontier vertex. Top-down probes each partition
/// for the frontier's vertices in ID order; bottom-up sweeps every edge and
/// tests membership. `automatic` goes bottom-up once the frontier holds more
/// than options().bottom_up_ratio of the vertices.
Frontier traverse(const ReadView& view, const Frontier& frontier, Direction dir,
                  TypeFilter filter = TypeFilter::any(), Strategy strategy = Strategy::automatic,
                  IoStats* stats = nullptr);

inline Frontier traverse_out(const ReadView& view, const Frontier& frontier,
                             TypeFilter filter = TypeFilter::any(),
                             Strategy strategy = Strategy::automatic, IoStats* stats = nullptr) {
  return traverse(view, frontier, Direction::out, filter, strategy, stats);
}
inline Frontier traverse_in(const ReadView& view, const Frontier& frontier,
                            TypeFilter filter = TypeFilter::any(),
                            Strategy strategy = Strategy::automatic, IoStats* stats = nullptr) {
  return traverse(view, frontier, Direction::in, filter, strategy, stats);
}

/// The strategy `automatic` would pick for this frontier.
Strategy choose_strategy(const ReadView& view, const Frontier& frontier);

inline constexpr std::uint64_t kDefaultFanoutCap = 200;

/// Two-hop out-neighbours of u that are neither u nor direct friends. Only
/// the fanout_cap friends with the lowest internal IDs are expanded.
Frontier friends_of_friends(const ReadView& view, InternalId u,
                            std::uint64_t fanout_cap = kDefaultFanoutCap,
                            TypeFilter filter = TypeFilter::any(), IoStats* stats = nullptr);

inline constexpr unsigned kDefaultMaxHops = 5;

/// Length of a shortest directed path from a to b of at most max_hops
/// edges. Two-sided level-synchronous search, expanding the smaller side.
std::optional<unsigned> shortest_path(const ReadView& view, InternalId a, InternalId b,
                                      unsigned max_hops = kDefaultMaxHops,
                                      TypeFilter filter = TypeFilter::any(),
                                      IoStats* stats = nullptr);

/// Original-ID conveniences over a fresh view.
std::vector<OriginalId> friends_of_friends(const Database& db, OriginalId u,
                                           std::uint64_t fanout_cap = kDefaultFanoutCap,
                                           TypeFilter filter = TypeFilter::any());
std::optional<unsigned> shortest_path(const Database& db, OriginalId a, OriginalId b,
                                      unsigned max_hops = kDefaultMaxHops,
                                      TypeFilter filter = TypeFilter::any());
std::vector<OriginalId> to_original(const Database& db, const Frontier& f);

}  // namespace palgraph::query
