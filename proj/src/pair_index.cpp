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

#include "palgraph/pair_index.hpp"

#include <fcntl.h>

#include <algorithm>
#include <cstring>

#include "palgraph/elias_gamma.hpp"

namespace palgraph {

void validate_index_entries(std::span<const IndexEntry> entries, bool ordered_pos) {
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].key <= entries[i - 1].key ||
        (ordered_pos && entries[i].pos <= entries[i - 1].pos))
      throw Error(Errc::invalid_argument, "index entries must strictly increase");
  }
}

// --- GammaPairIndex ---------------------------------------------------------

GammaPairIndex GammaPairIndex::encode(std::span<const IndexEntry> entries) {
  validate_index_entries(entries);
  gamma::BitWriter w;
  std::uint64_t k1 = 0;
  std::uint64_t p1 = 0;
  for (const auto& e : entries) {
    gamma::write_gamma(w, e.key + 1 - k1);
    gamma::write_gamma(w, e.pos + 1 - p1);
    k1 = e.key + 1;
    p1 = e.pos + 1;
  }
  GammaPairIndex idx;
  idx.count_ = entries.size();
  idx.bit_count_ = w.bit_count();
  idx.words_ = std::move(w).take();
  idx.build_samples();
  return idx;
}

void GammaPairIndex::build_samples() {
  samples_.clear();
  samples_.reserve(count_ / kSampleStride + 1);
  gamma::BitReader r(words_, bit_count_);
  std::uint64_t k1 = 0;
  std::uint64_t p1 = 0;
  for (std::uint64_t i = 0; i < count_; ++i) {
    const std::uint64_t bit = r.position();
    const std::uint64_t prev_k1 = k1;
    const std::uint64_t prev_p1 = p1;
    k1 += gamma::read_gamma(r);
    p1 += gamma::read_gamma(r);
    if (i % kSampleStride == 0) samples_.push_back({bit, prev_k1, prev_p1, k1 - 1, p1 - 1});
  }
}

void GammaPairIndex::write_file(const fs::path& path, std::span<const IndexEntry> entries,
                                bool sync, std::uint64_t* bytes_out) {
  GammaPairIndex idx = encode(entries);
  FileWriter out(path);
  out.write(make_header(kOutGammaMagic));
  out.put(idx.count_);
  out.put(idx.bit_count_);
  out.write(idx.words_.data(), idx.words_.size() * 8);
  if (bytes_out != nullptr) *bytes_out = out.bytes_written();
  out.finish(sync);
}

std::unique_ptr<GammaPairIndex> GammaPairIndex::open_file(const fs::path& path) {
  File f(path, O_RDONLY);
  const std::uint64_t size = f.size();
  std::array<std::byte, kFileHeaderSize + 16> head{};
  if (size < head.size()) throw CorruptionError(path.string() + ": truncated gamma index");
  f.pread_exact(head.data(), head.size(), 0);
  check_header(head, kOutGammaMagic, path.string());
  auto idx = std::make_unique<GammaPairIndex>();
  std::memcpy(&idx->count_, head.data() + kFileHeaderSize, 8);
  std::memcpy(&idx->bit_count_, head.data() + kFileHeaderSize + 8, 8);
  const std::uint64_t words = ceil_div(idx->bit_count_, 64);
  if (size != head.size() + words * 8)
    throw CorruptionError(path.string() + ": gamma index size mismatch");
  idx->words_.resize(words);
  if (words > 0) f.pread_exact(idx->words_.data(), words * 8, head.size());
  idx->build_samples();
  return idx;
}

std::optional<IndexRange> GammaPairIndex::find(std::uint64_t key, std::uint64_t end,
                                               IoStats* /*stats*/) const {
  if (count_ == 0) return std::nullopt;
  auto it = std::upper_bound(samples_.begin(), samples_.end(), key,
                             [](std::uint64_t k, const Sample& s) { return k < s.first_key; });
  if (it == samples_.begin()) return std::nullopt;
  const Sample& s = *(it - 1);
  const std::uint64_t first = static_cast<std::uint64_t>(it - 1 - samples_.begin()) * kSampleStride;
  gamma::BitReader r(words_, bit_count_, s.bit);
  std::uint64_t k1 = s.prev_key1;
  std::uint64_t p1 = s.prev_pos1;
  for (std::uint64_t i = first; i < count_; ++i) {
    k1 += gamma::read_gamma(r);
    p1 += gamma::read_gamma(r);
    if (k1 - 1 == key) {
      IndexRange out{p1 - 1, end};
      if (i + 1 < count_) {
        gamma::read_gamma(r);
        out.next = p1 + gamma::read_gamma(r) - 1;
      }
      return out;
    }
    if (k1 - 1 > key) break;
  }
  return std::nullopt;
}

IndexEntry GammaPairIndex::predecessor(std::uint64_t pos, IoStats* /*stats*/) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), pos,
                             [](std::uint64_t p, const Sample& s) { return p < s.first_pos; });
  if (it == samples_.begin())
    throw Error(Errc::out_of_range, "gamma index: no entry precedes position");
  const Sample& s = *(it - 1);
  const std::uint64_t first = static_cast<std::uint64_t>(it - 1 - samples_.begin()) * kSampleStride;
  gamma::BitReader r(words_, bit_count_, s.bit);
  std::uint64_t k1 = s.prev_key1;
  std::uint64_t p1 = s.prev_pos1;
  IndexEntry best{s.first_key, s.first_pos};
  for (std::uint64_t i = first; i < count_; ++i) {
    k1 += gamma::read_gamma(r);
    p1 += gamma::read_gamma(r);
    if (p1 - 1 > pos) break;
    best = {k1 - 1, p1 - 1};
  }
  return best;
}

std::vector<IndexEntry> GammaPairIndex::entries(IoStats* /*stats*/) const {
  std::vector<IndexEntry> out;
  out.reserve(count_);
  gamma::BitReader r(words_, bit_count_);
  std::uint64_t k1 = 0;
  std::uint64_t p1 = 0;
  for (std::uint64_t i = 0; i < count_; ++i) {
    k1 += gamma::read_gamma(r);
    p1 += gamma::read_gamma(r);
    out.push_back({k1 - 1, p1 - 1});
  }
  return out;
}

// --- DiskPairIndex ----------------------------------------------------------

void DiskPairIndex::write_file(const fs::path& path, const Magic& magic,
                               std::span<const IndexEntry> entries, bool sync,
                               std::uint64_t* bytes_out, bool ordered_pos) {
  validate_index_entries(entries, ordered_pos);
  FileWriter out(path);
  out.write(make_header(magic));
  for (const auto& e : entries) {
    out.put(e.key);
    out.put(e.pos);
  }
  if (bytes_out != nullptr) *bytes_out = out.bytes_written();
  out.finish(sync);
}

std::unique_ptr<DiskPairIndex> DiskPairIndex::open_file(const fs::path& path, const Magic& magic,
                                                        Mode mode, std::uint32_t stride,
                                                        std::uint32_t block_size) {
  auto idx = std::make_unique<DiskPairIndex>();
  idx->file_ = File(path, O_RDONLY);
  idx->mode_ = mode;
  idx->stride_ = std::max<std::uint32_t>(1, stride);
  idx->block_size_ = block_size;
  const std::uint64_t size = idx->file_.size();
  std::array<std::byte, kFileHeaderSize> head{};
  if (size < head.size()) throw CorruptionError(path.string() + ": truncated index");
  idx->file_.pread_exact(head.data(), head.size(), 0);
  check_header(head, magic, path.string());
  if ((size - kFileHeaderSize) % 16 != 0)
    throw CorruptionError(path.string() + ": index size is not a whole number of entries");
  idx->count_ = (size - kFileHeaderSize) / 16;
  if (mode == Mode::sparse && idx->count_ > 0) {
    auto all = idx->read_range(0, idx->count_, nullptr);
    for (std::uint64_t i = 0; i < all.size(); i += idx->stride_) idx->sparse_.push_back(all[i]);
  }
  return idx;
}

IndexEntry DiskPairIndex::read_entry(std::uint64_t i) const {
  std::uint64_t raw[2];
  file_.pread_exact(raw, sizeof(raw), kFileHeaderSize + i * 16);
  return {raw[0], raw[1]};
}

std::vector<IndexEntry> DiskPairIndex::read_range(std::uint64_t first, std::uint64_t count,
                                                  IoStats* stats) const {
  std::vector<IndexEntry> out(count);
  if (count == 0) return out;
  static_assert(sizeof(IndexEntry) == 16);
  file_.pread_exact(out.data(), count * 16, kFileHeaderSize + first * 16);
  if (stats != nullptr) {
    const std::uint64_t begin = kFileHeaderSize + first * 16;
    const std::uint64_t last = begin + count * 16 - 1;
    stats->seek();
    stats->blocks(last / block_size_ - begin / block_size_ + 1);
    stats->read(count * 16);
  }
  return out;
}

void DiskPairIndex::narrow(bool by_pos, std::uint64_t value, std::uint64_t& lo,
                           std::uint64_t& hi) const {
  auto it = std::upper_bound(sparse_.begin(), sparse_.end(), value,
                             [by_pos](std::uint64_t v, const IndexEntry& e) {
                               return v < (by_pos ? e.pos : e.key);
                             });
  if (it == sparse_.begin()) {
    lo = hi = 0;
    return;
  }
  lo = static_cast<std::uint64_t>(it - 1 - sparse_.begin()) * stride_;
  hi = std::min<std::uint64_t>(lo + stride_, count_);
}

template <typename Less>
std::uint64_t DiskPairIndex::disk_upper_bound(std::uint64_t lo, std::uint64_t hi, Less less,
                                              IoStats* stats) const {
  std::uint64_t last_block = UINT64_MAX;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const std::uint64_t block = (kFileHeaderSize + mid * 16) / block_size_;
    if (stats != nullptr && block != last_block) {
      stats->seek();
      stats->blocks(1);
      stats->read(16);
    }
    last_block = block;
    if (less(read_entry(mid))) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::optional<IndexRange> DiskPairIndex::find(std::uint64_t key, std::uint64_t end,
                                              IoStats* stats) const {
  if (count_ == 0) return std::nullopt;
  if (mode_ == Mode::sparse) {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    narrow(false, key, lo, hi);
    if (lo == hi) return std::nullopt;
    // One extra entry gives the end of the range.
    const std::uint64_t take = std::min<std::uint64_t>(hi + 1, count_) - lo;
    auto block = read_range(lo, take, stats);
    auto it = std::lower_bound(block.begin(), block.end(), key,
                               [](const IndexEntry& e, std::uint64_t k) { return e.key < k; });
    if (it == block.end() || it->key != key) return std::nullopt;
    IndexRange out{it->pos, end};
    if (it + 1 != block.end()) out.next = (it + 1)->pos;
    return out;
  }
  // First index with entry.key > key, then step back one.
  const std::uint64_t ub =
      disk_upper_bound(0, count_, [key](const IndexEntry& e) { return key < e.key; }, stats);
  if (ub == 0) return std::nullopt;
  const IndexEntry e = read_entry(ub - 1);
  if (e.key != key) return std::nullopt;
  IndexRange out{e.pos, end};
  if (ub < count_) {
    if (stats != nullptr && (kFileHeaderSize + ub * 16) / block_size_ !=
                                (kFileHeaderSize + (ub - 1) * 16) / block_size_) {
      stats->seek();
      stats->blocks(1);
    }
    out.next = read_entry(ub).pos;
  }
  return out;
}

IndexEntry DiskPairIndex::predecessor(std::uint64_t pos, IoStats* stats) const {
  if (count_ == 0) throw Error(Errc::out_of_range, "index is empty");
  if (mode_ == Mode::sparse) {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    narrow(true, pos, lo, hi);
    if (lo == hi) throw Error(Errc::out_of_range, "index: no entry precedes position");
    auto block = read_range(lo, hi - lo, stats);
    auto it = std::upper_bound(block.begin(), block.end(), pos,
                               [](std::uint64_t p, const IndexEntry& e) { return p < e.pos; });
    return *(it - 1);
  }
  const std::uint64_t ub =
      disk_upper_bound(0, count_, [pos](const IndexEntry& e) { return pos < e.pos; }, stats);
  if (ub == 0) throw Error(Errc::out_of_range, "index: no entry precedes position");
  return read_entry(ub - 1);
}

std::vector<IndexEntry> DiskPairIndex::entries(IoStats* stats) const {
  return read_range(0, count_, stats);
}

}  // namespace palgraph
