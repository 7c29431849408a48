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

#include "palgraph/edge_buffer.hpp"

#include <algorithm>
#include <cstring>

namespace palgraph {

std::uint32_t SubBuffer::add(const EdgeTuple& e, std::span<const std::byte> row) {
  if (row.size() != stride_) throw Error(Errc::invalid_argument, "buffer row has the wrong width");
  if (edges_.size() >= kNone - 1) throw Error(Errc::capacity, "edge buffer is full");
  const auto slot = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back(e);
  dead_.push_back(0);
  rows_.insert(rows_.end(), row.begin(), row.end());
  auto link = [slot](std::unordered_map<InternalId, std::uint32_t>& last,
                     std::vector<std::uint32_t>& prev, InternalId key) {
    auto [it, fresh] = last.try_emplace(key, slot);
    prev.push_back(fresh ? kNone : it->second);
    it->second = slot;
  };
  link(last_src_, prev_src_, e.src);
  link(last_dst_, prev_dst_, e.dst);
  ++live_;
  return slot;
}

void SubBuffer::kill(std::uint32_t slot) {
  if (!live(slot)) return;
  dead_[slot] = 1;
  --live_;
}

void SubBuffer::walk(const std::unordered_map<InternalId, std::uint32_t>& last,
                     const std::vector<std::uint32_t>& prev, InternalId v,
                     std::vector<std::uint32_t>& out) const {
  auto it = last.find(v);
  if (it == last.end()) return;
  const std::size_t first = out.size();
  for (std::uint32_t s = it->second; s != kNone; s = prev[s])
    if (dead_[s] == 0) out.push_back(s);
  std::reverse(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
}

void SubBuffer::slots_with_src(InternalId v, std::vector<std::uint32_t>& out) const {
  walk(last_src_, prev_src_, v, out);
}

void SubBuffer::slots_with_dst(InternalId v, std::vector<std::uint32_t>& out) const {
  walk(last_dst_, prev_dst_, v, out);
}

void SubBuffer::restride(std::size_t stride, std::span<const std::byte> null_row) {
  if (stride == stride_) return;
  if (null_row.size() < stride)
    throw Error(Errc::invalid_argument, "restride: null row is too short");
  std::vector<std::byte> rows(edges_.size() * stride);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    std::byte* dst = rows.data() + i * stride;
    std::memcpy(dst, null_row.data(), stride);
    std::memcpy(dst, rows_.data() + i * stride_, std::min(stride, stride_));
  }
  rows_ = std::move(rows);
  stride_ = stride;
}

bool SubBuffer::compact(std::uint64_t new_epoch) {
  if (live_ == edges_.size()) return false;
  SubBuffer next(stride_);
  for (std::uint32_t s = 0; s < slots(); ++s)
    if (dead_[s] == 0) next.add(edges_[s], {row(s), stride_});
  next.epoch_ = new_epoch;
  *this = std::move(next);
  return true;
}

void SubBuffer::clear(std::uint64_t new_epoch) {
  SubBuffer next(stride_);
  next.epoch_ = new_epoch;
  *this = std::move(next);
}

}  // namespace palgraph
