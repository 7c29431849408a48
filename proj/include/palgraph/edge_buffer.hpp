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
#include <span>
#include <unordered_map>
#include <vector>

#include "palgraph/core.hpp"

namespace palgraph {

/// One edge buffer: the edges of one top-level partition whose source lies
/// in one vertex interval. Slots are append-only until the buffer is
/// compacted; deleted slots stay dead in place. Rows are stored inline with
/// an 8-byte aligned stride.
class SubBuffer {
 public:
  static constexpr std::uint32_t kNone = UINT32_MAX;

  explicit SubBuffer(std::size_t stride = 0) : stride_(stride) {}

  std::uint32_t slots() const noexcept { return static_cast<std::uint32_t>(edges_.size()); }
  std::uint64_t live_count() const noexcept { return live_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  std::size_t stride() const noexcept { return stride_; }

  /// `row` must be exactly stride() bytes.
  std::uint32_t add(const EdgeTuple& e, std::span<const std::byte> row);
  void kill(std::uint32_t slot);
  bool live(std::uint32_t slot) const noexcept { return slot < slots() && dead_[slot] == 0; }
  const EdgeTuple& edge(std::uint32_t slot) const { return edges_[slot]; }
  void set_type(std::uint32_t slot, std::uint8_t type) { edges_[slot].type = type; }
  std::byte* row(std::uint32_t slot) { return rows_.data() + slot * stride_; }
  const std::byte* row(std::uint32_t slot) const { return rows_.data() + slot * stride_; }

  /// Live slots with the given source (destination), ascending.
  void slots_with_src(InternalId v, std::vector<std::uint32_t>& out) const;
  void slots_with_dst(InternalId v, std::vector<std::uint32_t>& out) const;

  /// Widens every row to `stride`, filling the new tail from `null_row`.
  void restride(std::size_t stride, std::span<const std::byte> null_row);
  /// Drops dead slots. Returns true and bumps the epoch if any were dropped.
  bool compact(std::uint64_t new_epoch);
  void clear(std::uint64_t new_epoch);

 private:
  void walk(const std::unordered_map<InternalId, std::uint32_t>& last,
            const std::vector<std::uint32_t>& prev, InternalId v,
            std::vector<std::uint32_t>& out) const;

  std::vector<EdgeTuple> edges_;
  std::vector<std::uint8_t> dead_;
  std::vector<std::byte> rows_;
  std::size_t stride_ = 0;
  std::uint64_t live_ = 0;
  std::uint64_t epoch_ = 0;
  // Per-key chains through the slots, newest first.
  std::vector<std::uint32_t> prev_src_;
  std::vector<std::uint32_t> prev_dst_;
  std::unordered_map<InternalId, std::uint32_t> last_src_;
  std::unordered_map<InternalId, std::uint32_t> last_dst_;
};

inline std::size_t row_stride(std::size_t row_width) noexcept { return (row_width + 7) / 8 * 8; }

}  // namespace palgraph
