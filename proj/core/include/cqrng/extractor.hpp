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

// Toeplitz hashing of raw bits into nearly uniform output, sized by the
// leftover-hash budget.
//
// Matrix convention: T[i][j] = seed[i - j + n - 1], i < m, j < n, so
// y_i = XOR_j T[i][j] x[j]. Bits follow BitStream order (MSB first).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cqrng/bitstream.hpp"

namespace cqrng::extractor {

inline constexpr double kDefaultEpsSec = 0x1.0p-64;
inline constexpr std::uint64_t kDefaultBlockBits = 65536;
inline constexpr std::size_t kMinMasterBytes = 8;

struct ExtractorParams {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  double eps_sec = kDefaultEpsSec;
  BitStream seed;  // n + m - 1 bits
};

/// Throws InvalidArgument when m is outside [1, n] or eps_sec outside (0, 1),
/// DimensionError when the seed length is not n + m - 1.
void validate(const ExtractorParams& params);

/// floor(n h - 2 log2(1/eps_sec)), clamped at 0.
std::uint64_t output_length(std::uint64_t n, double h_min, double eps_sec = kDefaultEpsSec);

/// m output bits of x (which must have exactly n bits).
BitStream toeplitz_extract(const BitStream& x, const ExtractorParams& params);

/// Seed bits for block `block`, expanded from the master seed by a keyed
/// SplitMix64 counter stream.
BitStream expand_seed(const std::vector<std::uint8_t>& master, std::uint64_t block,
                      std::uint64_t bits);

/// First 64 bits of the Toeplitz hash of the master seed keyed by its own
/// expansion (block index 2^64 - 1, never used for data).
std::uint64_t seed_fingerprint(const std::vector<std::uint8_t>& master);

/// 32 bytes from std::random_device.
std::vector<std::uint8_t> os_seed(std::size_t bytes = 32);

struct ExtractionResult {
  BitStream bits;  // meta: origin "extract", h_min, seed fingerprint
  double h_min = 0.0;
  double eps_sec = kDefaultEpsSec;
  std::uint64_t block_bits = kDefaultBlockBits;
  std::uint64_t output_per_block = 0;
  std::uint64_t blocks = 0;
  std::uint64_t dropped_bits = 0;  // final partial block
};

/// Splits `raw` into full blocks, hashes each with its own seed segment and
/// concatenates the outputs in block order. Throws UndersizedDataError when
/// no full block exists or when h_min leaves nothing certifiable.
ExtractionResult extract_stream(const BitStream& raw, double h_min, double eps_sec,
                                const std::vector<std::uint8_t>& master,
                                std::uint64_t block_bits = kDefaultBlockBits,
                                unsigned threads = 1);

}  // namespace cqrng::extractor
