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

#include <bit>
#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "palgraph/core.hpp"

namespace palgraph::gamma {

// Bits are stored MSB-first: stream bit i lives in words[i / 64] at bit
// position 63 - i % 64. A code therefore reads left to right in a dump.

class BitWriter {
 public:
  void put_bit(bool bit) { put_bits(bit ? 1u : 0u, 1); }

  /// Appends the low n bits of value, most significant first. n <= 64.
  void put_bits(std::uint64_t value, unsigned n) {
    if (n == 0) return;
    if (n < 64) value &= (std::uint64_t{1} << n) - 1;
    const unsigned used = static_cast<unsigned>(bits_ % 64);
    if (used == 0) words_.push_back(0);
    const unsigned room = 64 - used;
    if (n <= room) {
      words_.back() |= value << (room - n);
    } else {
      const unsigned spill = n - room;
      words_.back() |= value >> spill;
      words_.push_back(value << (64 - spill));
    }
    bits_ += n;
  }

  std::uint64_t bit_count() const noexcept { return bits_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  std::vector<std::uint64_t> take() && { return std::move(words_); }

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader() = default;
  BitReader(std::span<const std::uint64_t> words, std::uint64_t bit_count,
            std::uint64_t start = 0)
      : words_(words), end_(bit_count), pos_(start) {}

  std::uint64_t position() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ >= end_; }

  bool get_bit() {
    require(1);
    bool b = (words_[pos_ / 64] >> (63 - pos_ % 64)) & 1u;
    ++pos_;
    return b;
  }

  std::uint64_t get_bits(unsigned n) {
    if (n == 0) return 0;
    require(n);
    const unsigned offset = static_cast<unsigned>(pos_ % 64);
    const std::uint64_t w = words_[pos_ / 64];
    std::uint64_t out;
    if (offset + n <= 64) {
      out = (w << offset) >> (64 - n);
    } else {
      const unsigned first = 64 - offset;
      const unsigned rest = n - first;
      const std::uint64_t hi = (w << offset) >> offset;
      out = (hi << rest) | (words_[pos_ / 64 + 1] >> (64 - rest));
    }
    pos_ += n;
    return out;
  }

  /// Consumes zero bits up to (not including) the next one bit.
  unsigned skip_zeros() {
    unsigned zeros = 0;
    for (;;) {
      if (pos_ >= end_) throw CorruptionError("gamma stream: unterminated code");
      const unsigned offset = static_cast<unsigned>(pos_ % 64);
      const std::uint64_t w = words_[pos_ / 64] << offset;
      if (w != 0) {
        const unsigned lz = static_cast<unsigned>(std::countl_zero(w));
        if (pos_ + lz >= end_) throw CorruptionError("gamma stream: unterminated code");
        zeros += lz;
        pos_ += lz;
        return zeros;
      }
      const unsigned skipped = 64 - offset;
      zeros += skipped;
      pos_ += skipped;
    }
  }

 private:
  void require(unsigned n) const {
    if (pos_ + n > end_) throw CorruptionError("gamma stream: read past end");
  }

  std::span<const std::uint64_t> words_;
  std::uint64_t end_ = 0;
  std::uint64_t pos_ = 0;
};

/// Elias-Gamma code of x >= 1: floor(log2 x) zeros, then x in binary.
inline void write_gamma(BitWriter& out, std::uint64_t x) {
  assert(x >= 1);
  const unsigned len = static_cast<unsigned>(std::bit_width(x));
  out.put_bits(0, len - 1);
  out.put_bits(x, len);
}

inline std::uint64_t read_gamma(BitReader& in) {
  const unsigned zeros = in.skip_zeros();
  if (zeros > 63) throw CorruptionError("gamma stream: code too long");
  // The leading one bit is the top bit of the value.
  return in.get_bits(zeros + 1);
}

/// The code as a string of '0'/'1', for tests and dumps.
inline std::string code_string(std::uint64_t x) {
  BitWriter w;
  write_gamma(w, x);
  BitReader r(w.words(), w.bit_count());
  std::string s;
  while (!r.at_end()) s.push_back(r.get_bit() ? '1' : '0');
  return s;
}

struct EncodedSequence {
  std::vector<std::uint64_t> words;
  std::uint64_t bit_count = 0;
  std::uint64_t count = 0;
};

/// Delta-codes a strictly increasing sequence of non-negative integers. The
/// first value is stored as value + 1 so that every code is positive.
inline EncodedSequence encode_increasing(std::span<const std::uint64_t> values) {
  BitWriter w;
  std::uint64_t prev = 0;  // in the value + 1 domain
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t shifted = values[i] + 1;
    if (i > 0 && shifted <= prev)
      throw Error(Errc::invalid_argument, "gamma: sequence is not strictly increasing");
    write_gamma(w, shifted - prev);
    prev = shifted;
  }
  EncodedSequence out;
  out.bit_count = w.bit_count();
  out.count = values.size();
  out.words = std::move(w).take();
  return out;
}

inline std::vector<std::uint64_t> decode_increasing(const EncodedSequence& seq) {
  std::vector<std::uint64_t> out;
  out.reserve(seq.count);
  BitReader r(seq.words, seq.bit_count);
  std::uint64_t acc = 0;
  for (std::uint64_t i = 0; i < seq.count; ++i) {
    acc += read_gamma(r);
    out.push_back(acc - 1);
  }
  return out;
}

}  // namespace palgraph::gamma
