// Copyright 2026 The cqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Packed bit sequences and the CQRN file format:
//   "CQRN" | version (1 byte, = 1) | bit count (u64 little-endian) | payload
// with bits packed most-significant-bit first within each byte.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqrng {

struct BitStreamMeta {
  std::string origin;
  std::optional<double> h_min;
  std::optional<std::uint64_t> seed_fingerprint;

  friend bool operator==(const BitStreamMeta&, const BitStreamMeta&) = default;
};

class BitStream {
 public:
  BitStream() = default;
  /// `packed` must hold exactly ceil(size / 8) bytes; trailing pad bits are
  /// cleared.
  BitStream(std::vector<std::uint8_t> packed, std::uint64_t size, BitStreamMeta meta = {});

  static BitStream from_bits(const std::vector<std::uint8_t>& bits, BitStreamMeta meta = {});

  std::uint64_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool operator[](std::uint64_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  const BitStreamMeta& meta() const noexcept { return meta_; }

  /// Bits [first, first + count) as 0/1 values.
  std::vector<std::uint8_t> unpack(std::uint64_t first, std::uint64_t count) const;
  std::vector<std::uint8_t> unpack() const { return unpack(0, size_); }
  std::uint64_t count_ones() const;

  BitStream with_meta(BitStreamMeta meta) const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t size_ = 0;
  BitStreamMeta meta_;
};

/// Append-only builder.
class BitWriter {
 public:
  void push(bool bit) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ & 7));
    ++size_;
  }
  void append(const BitStream& bits);
  std::uint64_t size() const noexcept { return size_; }
  BitStream finish(BitStreamMeta meta = {}) &&;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t size_ = 0;
};

inline constexpr std::uint8_t kCqrnVersion = 1;

void write_cqrn(std::ostream& out, const BitStream& bits);
/// Throws InvalidArgument on a bad magic, version or truncated payload.
BitStream read_cqrn(std::istream& in);

}  // namespace cqrng
