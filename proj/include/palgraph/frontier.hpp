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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "palgraph/core.hpp"

namespace palgraph {

/// Set of internal vertex IDs in [0, universe). Small sets are a sorted
/// vector; once the set holds more than universe / kDenseDivisor IDs it
/// switches to a bitmap. Inserts are buffered and folded in lazily, so a
/// Frontier is not safe for concurrent use while being modified.
class Frontier {
 public:
  static constexpr std::uint64_t kDenseDivisor = 64;

  Frontier() = default;
  explicit Frontier(std::uint64_t universe) : universe_(universe) {}
  static Frontier of(std::uint64_t universe, std::span<const InternalId> ids) {
    Frontier f(universe);
    for (auto v : ids) f.insert(v);
    return f;
  }

  std::uint64_t universe() const noexcept { return universe_; }
  bool dense() const {
    normalize();
    return !bits_.empty();
  }

  void insert(InternalId v) {
    if (v >= universe_) throw Error(Errc::out_of_range, "frontier: vertex outside the universe");
    if (!bits_.empty()) {
      std::uint64_t& w = bits_[v / 64];
      const std::uint64_t m = std::uint64_t{1} << (v % 64);
      count_ += (w & m) == 0;
      w |= m;
      return;
    }
    pending_.push_back(v);
    if (pending_.size() > std::max<std::size_t>(1024, ids_.size())) normalize();
  }

  bool contains(InternalId v) const {
    normalize();
    if (v >= universe_) return false;
    if (!bits_.empty()) return (bits_[v / 64] >> (v % 64)) & 1u;
    return std::binary_search(ids_.begin(), ids_.end(), v);
  }

  std::uint64_t size() const {
    normalize();
    return bits_.empty() ? ids_.size() : count_;
  }
  bool empty() const { return size() == 0; }

  /// Visits members in increasing order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    normalize();
    if (bits_.empty()) {
      for (auto v : ids_) fn(v);
      return;
    }
    for (std::uint64_t i = 0; i < bits_.size(); ++i)
      for (std::uint64_t w = bits_[i]; w != 0; w &= w - 1)
        fn(i * 64 + static_cast<std::uint64_t>(std::countr_zero(w)));
  }

  std::vector<InternalId> to_vector() const {
    std::vector<InternalId> out;
    out.reserve(size());
    for_each([&](InternalId v) { out.push_back(v); });
    return out;
  }

  /// Members not in `other`.
  Frontier minus(const Frontier& other) const {
    Frontier out(universe_);
    for_each([&](InternalId v) {
      if (!other.contains(v)) out.insert(v);
    });
    return out;
  }

  void merge(const Frontier& other) {
    other.for_each([&](InternalId v) { insert(v); });
  }

  bool intersects(const Frontier& other) const {
    const Frontier& small = size() <= other.size() ? *this : other;
    const Frontier& big = &small == this ? other : *this;
    bool hit = false;
    small.for_each([&](InternalId v) { hit = hit || big.contains(v); });
    return hit;
  }

  friend bool operator==(const Frontier& a, const Frontier& b) {
    return a.to_vector() == b.to_vector();
  }

 private:
  void normalize() const {
    if (pending_.empty()) return;
    if (bits_.empty()) {
      ids_.insert(ids_.end(), pending_.begin(), pending_.end());
      pending_.clear();
      std::sort(ids_.begin(), ids_.end());
      ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
      if (ids_.size() > universe_ / kDenseDivisor) {
        bits_.assign((universe_ + 63) / 64, 0);
        for (auto v : ids_) bits_[v / 64] |= std::uint64_t{1} << (v % 64);
        count_ = ids_.size();
        ids_.clear();
        ids_.shrink_to_fit();
      }
    }
  }

  std::uint64_t universe_ = 0;
  mutable std::vector<InternalId> ids_;      // sorted, unique (sparse form)
  mutable std::vector<InternalId> pending_;  // unsorted inserts
  mutable std::vector<std::uint64_t> bits_;  // dense form
  mutable std::uint64_t count_ = 0;
};

}  // namespace palgraph
