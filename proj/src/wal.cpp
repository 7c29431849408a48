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

#include "palgraph/wal.hpp"

#include <fcntl.h>
#include <zlib.h>

#include <cstring>

#include "palgraph/core.hpp"

namespace palgraph {

namespace {

std::uint32_t payload_crc(std::span<const std::byte> payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::byte> frame(std::span<const std::byte> payload) {
  std::vector<std::byte> rec(8 + payload.size());
  const auto len = static_cast<std::uint32_t>(payload.size());
  const std::uint32_t crc = payload_crc(payload);
  std::memcpy(rec.data(), &len, 4);
  std::memcpy(rec.data() + 4, &crc, 4);
  if (!payload.empty()) std::memcpy(rec.data() + 8, payload.data(), payload.size());
  return rec;
}

/// Parses records; returns the offset just past the last intact one.
std::uint64_t scan(const File& f, const fs::path& path, Wal::Contents& out) {
  const std::uint64_t size = f.size();
  std::array<std::byte, kFileHeaderSize> head{};
  if (size < kFileHeaderSize) throw CorruptionError(path.string() + ": truncated log header");
  f.pread_exact(head.data(), head.size(), 0);
  out.generation = check_header(head, kWalMagic, path.string());
  std::vector<std::byte> data(size - kFileHeaderSize);
  if (!data.empty()) f.pread_exact(data.data(), data.size(), kFileHeaderSize);
  std::uint64_t pos = 0;
  while (pos + 8 <= data.size()) {
    std::uint32_t len;
    std::uint32_t crc;
    std::memcpy(&len, data.data() + pos, 4);
    std::memcpy(&crc, data.data() + pos + 4, 4);
    if (pos + 8 + len > data.size()) break;
    std::span<const std::byte> payload(data.data() + pos + 8, len);
    if (payload_crc(payload) != crc) break;
    out.records.emplace_back(payload.begin(), payload.end());
    pos += 8 + len;
  }
  out.torn_bytes = data.size() - pos;
  return kFileHeaderSize + pos;
}

}  // namespace

Wal::Contents Wal::read(const fs::path& path) {
  File f(path, O_RDONLY);
  Contents c;
  scan(f, path, c);
  return c;
}

std::unique_ptr<Wal> Wal::open(const fs::path& path, Contents* contents) {
  std::unique_ptr<Wal> wal(new Wal());
  wal->file_ = File(path, O_RDWR);
  Contents c;
  const std::uint64_t end = scan(wal->file_, path, c);
  if (c.torn_bytes > 0) {
    wal->file_.truncate(end);
    wal->file_.sync_data();
  }
  wal->generation_ = c.generation;
  wal->end_ = end;
  if (contents != nullptr) *contents = std::move(c);
  return wal;
}

std::unique_ptr<Wal> Wal::create(const fs::path& path, std::uint32_t generation,
                                 std::span<const std::vector<std::byte>> records) {
  std::unique_ptr<Wal> wal(new Wal());
  {
    FileWriter out(path);
    out.write(make_header(kWalMagic, generation));
    for (const auto& r : records) out.write(frame(r));
    wal->end_ = out.bytes_written();
    out.finish(true);
  }
  wal->file_ = File(path, O_RDWR);
  wal->generation_ = generation;
  return wal;
}

std::uint64_t Wal::append(std::span<const std::byte> payload) {
  if (payload.size() > UINT32_MAX) throw Error(Errc::capacity, "log record too large");
  const auto rec = frame(payload);
  std::lock_guard lock(mu_);
  file_.pwrite_all(rec.data(), rec.size(), end_);
  end_ += rec.size();
  return ++appended_;
}

void Wal::sync(std::uint64_t lsn) {
  std::unique_lock lock(mu_);
  while (synced_ < lsn) {
    if (syncing_) {
      cv_.wait(lock);
      continue;
    }
    syncing_ = true;
    const std::uint64_t target = appended_;
    lock.unlock();
    try {
      file_.sync_data();
    } catch (...) {
      lock.lock();
      syncing_ = false;
      cv_.notify_all();
      throw;
    }
    lock.lock();
    syncing_ = false;
    ++sync_count_;
    if (target > synced_) synced_ = target;
    cv_.notify_all();
  }
}

void Wal::adopt(Wal&& next) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !syncing_; });
  file_ = std::move(next.file_);
  generation_ = next.generation_;
  end_ = next.end_;
  synced_ = appended_;
  cv_.notify_all();
}

std::uint64_t Wal::syncs() const {
  std::lock_guard lock(mu_);
  return sync_count_;
}

}  // namespace palgraph
