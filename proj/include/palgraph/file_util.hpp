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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace palgraph {

namespace fs = std::filesystem;

// Every binary file starts with this 16-byte header, little-endian:
//   magic[8] | u32 version | u32 aux
inline constexpr std::size_t kFileHeaderSize = 16;
inline constexpr std::uint32_t kFormatVersion = 1;

using Magic = std::array<char, 8>;

inline constexpr Magic kEdgesMagic{'P', 'A', 'L', 'E', 'D', 'G', 'E', 'S'};
inline constexpr Magic kOutGammaMagic{'P', 'A', 'L', 'O', 'U', 'T', 'G', 'M'};
inline constexpr Magic kOutRawMagic{'P', 'A', 'L', 'O', 'U', 'T', 'I', 'X'};
inline constexpr Magic kInIndexMagic{'P', 'A', 'L', 'I', 'N', 'I', 'D', 'X'};
inline constexpr Magic kColumnMagic{'P', 'A', 'L', 'C', 'O', 'L', 'M', 'N'};
inline constexpr Magic kVertexColumnMagic{'P', 'A', 'L', 'V', 'C', 'O', 'L', 'M'};
inline constexpr Magic kPayloadMagic{'P', 'A', 'L', 'V', 'L', 'O', 'G', '1'};
inline constexpr Magic kWalMagic{'P', 'A', 'L', 'W', 'A', 'L', 'O', 'G'};

std::array<std::byte, kFileHeaderSize> make_header(const Magic& magic, std::uint32_t aux = 0);
/// Throws CorruptionError on a bad magic or version. Returns aux.
std::uint32_t check_header(std::span<const std::byte> bytes, const Magic& magic,
                           const std::string& what);

/// Owning POSIX file descriptor.
class File {
 public:
  File() = default;
  File(const fs::path& path, int flags, int mode = 0644);
  ~File();
  File(File&& other) noexcept;
  File& operator=(File&& other) noexcept;
  File(const File&) = delete;
  File& operator=(const File&) = delete;

  int fd() const noexcept { return fd_; }
  bool is_open() const noexcept { return fd_ >= 0; }
  std::uint64_t size() const;

  void pread_exact(void* out, std::size_t n, std::uint64_t offset) const;
  void pwrite_all(const void* data, std::size_t n, std::uint64_t offset) const;
  void write_all(const void* data, std::size_t n) const;
  void truncate(std::uint64_t size) const;
  void sync_data() const;
  void close();

 private:
  int fd_ = -1;
  std::string path_;
};

/// Shared read-write or read-only memory mapping of a whole file.
class MappedFile {
 public:
  MappedFile() = default;
  static MappedFile open(const fs::path& path, bool writable);
  ~MappedFile();
  MappedFile(MappedFile&& other) noexcept;
  MappedFile& operator=(MappedFile&& other) noexcept;
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  std::byte* data() noexcept { return data_; }
  const std::byte* data() const noexcept { return data_; }
  std::size_t size() const noexcept { return size_; }
  bool writable() const noexcept { return writable_; }

  /// Synchronously flushes the pages covering [offset, offset+len).
  void sync(std::size_t offset, std::size_t len) const;
  void sync_all() const { sync(0, size_); }

 private:
  std::byte* data_ = nullptr;
  std::size_t size_ = 0;
  bool writable_ = false;
};

/// Sequential buffered writer used by partition construction.
class FileWriter {
 public:
  explicit FileWriter(const fs::path& path);
  ~FileWriter();
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;

  void write(const void* data, std::size_t n);
  void write(std::span<const std::byte> bytes) { write(bytes.data(), bytes.size()); }
  template <typename T>
  void put(const T& value) {
    write(&value, sizeof(T));
  }
  std::uint64_t bytes_written() const noexcept { return written_; }
  /// Flushes buffered bytes, optionally fsyncs, and closes.
  void finish(bool sync);

 private:
  void drain();
  File file_;
  std::vector<std::byte> buf_;
  std::size_t used_ = 0;
  std::uint64_t written_ = 0;
  bool finished_ = false;
};

void fsync_dir(const fs::path& dir);
/// Writes to a temporary sibling, then renames over the target.
void write_file_atomic(const fs::path& path, std::string_view content, bool sync);
std::string read_file(const fs::path& path);

}  // namespace palgraph
