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

#include "palgraph/file_util.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "palgraph/core.hpp"

namespace palgraph {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw Error(Errc::io, what + ": " + std::strerror(errno));
}

}  // namespace

std::array<std::byte, kFileHeaderSize> make_header(const Magic& magic, std::uint32_t aux) {
  std::array<std::byte, kFileHeaderSize> h{};
  std::memcpy(h.data(), magic.data(), magic.size());
  const std::uint32_t version = kFormatVersion;
  std::memcpy(h.data() + 8, &version, 4);
  std::memcpy(h.data() + 12, &aux, 4);
  return h;
}

std::uint32_t check_header(std::span<const std::byte> bytes, const Magic& magic,
                           const std::string& what) {
  if (bytes.size() < kFileHeaderSize) throw CorruptionError(what + ": truncated header");
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw CorruptionError(what + ": bad magic");
  std::uint32_t version = 0;
  std::uint32_t aux = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&aux, bytes.data() + 12, 4);
  if (version != kFormatVersion)
    throw CorruptionError(what + ": unsupported version " + std::to_string(version));
  return aux;
}

// --- File -------------------------------------------------------------------

File::File(const fs::path& path, int flags, int mode) : path_(path.string()) {
  fd_ = ::open(path.c_str(), flags | O_CLOEXEC, mode);
  if (fd_ < 0) throw_errno("open " + path_);
}

File::~File() { close(); }

File::File(File&& other) noexcept : fd_(other.fd_), path_(std::move(other.path_)) {
  other.fd_ = -1;
}

File& File::operator=(File&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    path_ = std::move(other.path_);
    other.fd_ = -1;
  }
  return *this;
}

void File::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::uint64_t File::size() const {
  struct stat st {};
  if (::fstat(fd_, &st) != 0) throw_errno("fstat " + path_);
  return static_cast<std::uint64_t>(st.st_size);
}

void File::pread_exact(void* out, std::size_t n, std::uint64_t offset) const {
  auto* p = static_cast<char*>(out);
  while (n > 0) {
    ssize_t r = ::pread(fd_, p, n, static_cast<off_t>(offset));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("pread " + path_);
    }
    if (r == 0) throw CorruptionError("unexpected end of file in " + path_);
    p += r;
    n -= static_cast<std::size_t>(r);
    offset += static_cast<std::uint64_t>(r);
  }
}

void File::pwrite_all(const void* data, std::size_t n, std::uint64_t offset) const {
  const auto* p = static_cast<const char*>(data);
  while (n > 0) {
    ssize_t r = ::pwrite(fd_, p, n, static_cast<off_t>(offset));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("pwrite " + path_);
    }
    p += r;
    n -= static_cast<std::size_t>(r);
    offset += static_cast<std::uint64_t>(r);
  }
}

void File::write_all(const void* data, std::size_t n) const {
  const auto* p = static_cast<const char*>(data);
  while (n > 0) {
    ssize_t r = ::write(fd_, p, n);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("write " + path_);
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
}

void File::truncate(std::uint64_t size) const {
  if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) throw_errno("ftruncate " + path_);
}

void File::sync_data() const {
  if (::fdatasync(fd_) != 0) throw_errno("fdatasync " + path_);
}

// --- MappedFile -------------------------------------------------------------

MappedFile MappedFile::open(const fs::path& path, bool writable) {
  File f(path, writable ? O_RDWR : O_RDONLY);
  MappedFile m;
  m.size_ = static_cast<std::size_t>(f.size());
  m.writable_ = writable;
  if (m.size_ == 0) return m;
  int prot = PROT_READ | (writable ? PROT_WRITE : 0);
  void* p = ::mmap(nullptr, m.size_, prot, MAP_SHARED, f.fd(), 0);
  if (p == MAP_FAILED) throw_errno("mmap " + path.string());
  m.data_ = static_cast<std::byte*>(p);
  return m;
}

MappedFile::~MappedFile() {
  if (data_ != nullptr) ::munmap(data_, size_);
}

MappedFile::MappedFile(MappedFile&& other) noexcept
    : data_(other.data_), size_(other.size_), writable_(other.writable_) {
  other.data_ = nullptr;
  other.size_ = 0;
}

MappedFile& MappedFile::operator=(MappedFile&& other) noexcept {
  if (this != &other) {
    if (data_ != nullptr) ::munmap(data_, size_);
    data_ = other.data_;
    size_ = other.size_;
    writable_ = other.writable_;
    other.data_ = nullptr;
    other.size_ = 0;
  }
  return *this;
}

void MappedFile::sync(std::size_t offset, std::size_t len) const {
  if (data_ == nullptr || len == 0) return;
  static const std::size_t page = static_cast<std::size_t>(::sysconf(_SC_PAGESIZE));
  std::size_t begin = offset / page * page;
  std::size_t end = std::min(size_, offset + len);
  if (::msync(data_ + begin, end - begin, MS_SYNC) != 0) throw_errno("msync");
}

// --- FileWriter -------------------------------------------------------------

FileWriter::FileWriter(const fs::path& path)
    : file_(path, O_WRONLY | O_CREAT | O_TRUNC), buf_(1 << 20) {}

FileWriter::~FileWriter() {
  if (!finished_) {
    try {
      drain();
    } catch (...) {
    }
  }
}

void FileWriter::write(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::byte*>(data);
  written_ += n;
  while (n > 0) {
    std::size_t take = std::min(n, buf_.size() - used_);
    std::memcpy(buf_.data() + used_, p, take);
    used_ += take;
    p += take;
    n -= take;
    if (used_ == buf_.size()) drain();
  }
}

void FileWriter::drain() {
  if (used_ > 0) {
    file_.write_all(buf_.data(), used_);
    used_ = 0;
  }
}

void FileWriter::finish(bool sync) {
  drain();
  if (sync) file_.sync_data();
  file_.close();
  finished_ = true;
}

// --- helpers ----------------------------------------------------------------

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) throw_errno("open dir " + dir.string());
  ::fsync(fd);
  ::close(fd);
}

void write_file_atomic(const fs::path& path, std::string_view content, bool sync) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    File f(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    f.write_all(content.data(), content.size());
    if (sync) f.sync_data();
  }
  fs::rename(tmp, path);
  if (sync) fsync_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace palgraph
