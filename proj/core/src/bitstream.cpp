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

#include "cqrng/bitstream.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>

#include "cqrng/error.hpp"

namespace cqrng {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'Q', 'R', 'N'};

std::uint64_t byte_count(std::uint64_t bits) { return (bits + 7) / 8; }

}  // namespace

BitStream::BitStream(std::vector<std::uint8_t> packed, std::uint64_t size, BitStreamMeta meta)
    : bytes_(std::move(packed)), size_(size), meta_(std::move(meta)) {
  if (bytes_.size() != byte_count(size_))
    throw DimensionError("BitStream: payload length does not match bit count");
  if (size_ & 7) bytes_.back() &= static_cast<std::uint8_t>(0xffu << (8 - (size_ & 7)));
}

BitStream BitStream::from_bits(const std::vector<std::uint8_t>& bits, BitStreamMeta meta) {
  BitWriter w;
  for (auto b : bits) {
    if (b > 1) throw InvalidArgument("BitStream::from_bits: values must be 0 or 1");
    w.push(b != 0);
  }
  return std::move(w).finish(std::move(meta));
}

std::vector<std::uint8_t> BitStream::unpack(std::uint64_t first, std::uint64_t count) const {
  if (first > size_ || count > size_ - first) throw InvalidArgument("BitStream: range out of bounds");
  std::vector<std::uint8_t> out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = (*this)[first + i];
  return out;
}

std::uint64_t BitStream::count_ones() const {
  std::uint64_t n = 0;
  for (auto b : bytes_) n += static_cast<std::uint64_t>(std::popcount(b));
  return n;
}

BitStream BitStream::with_meta(BitStreamMeta meta) const {
  BitStream copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

void BitWriter::append(const BitStream& bits) {
  if ((size_ & 7) == 0) {
    bytes_.insert(bytes_.end(), bits.bytes().begin(), bits.bytes().end());
    size_ += bits.size();
    return;
  }
  for (std::uint64_t i = 0; i < bits.size(); ++i) push(bits[i]);
}

BitStream BitWriter::finish(BitStreamMeta meta) && {
  return BitStream(std::move(bytes_), size_, std::move(meta));
}

void write_cqrn(std::ostream& out, const BitStream& bits) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kCqrnVersion));
  std::array<char, 8> len{};
  for (int k = 0; k < 8; ++k) len[k] = static_cast<char>((bits.size() >> (8 * k)) & 0xff);
  out.write(len.data(), len.size());
  out.write(reinterpret_cast<const char*>(bits.bytes().data()),
            static_cast<std::streamsize>(bits.bytes().size()));
  if (!out) throw Error("write_cqrn: stream write failed");
}

BitStream read_cqrn(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidArgument("read_cqrn: bad magic");
  const int version = in.get();
  if (version != kCqrnVersion) throw InvalidArgument("read_cqrn: unsupported version");
  std::array<unsigned char, 8> len{};
  in.read(reinterpret_cast<char*>(len.data()), len.size());
  if (!in) throw InvalidArgument("read_cqrn: truncated header");
  std::uint64_t n = 0;
  for (int k = 0; k < 8; ++k) n |= static_cast<std::uint64_t>(len[k]) << (8 * k);
  if (n > (std::uint64_t{1} << 46)) throw InvalidArgument("read_cqrn: implausible bit count");
  std::vector<std::uint8_t> bytes(byte_count(n));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != bytes.size())
    throw InvalidArgument("read_cqrn: truncated payload");
  return BitStream(std::move(bytes), n);
}

}  // namespace cqrng
