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


#include "cqrng/extractor.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <random>
#include <thread>

#include "cqrng/error.hpp"
#include "cqrng/rng.hpp"

namespace cqrng::extractor {

namespace {

// Bits packed MSB-first into 64-bit words, zero padded with `extra` words.
std::vector<std::uint64_t> words_of(const std::vector<std::uint8_t>& bits01, std::size_t extra) {
  std::vector<std::uint64_t> w((bits01.size() + 63) / 64 + extra, 0);
  for (std::size_t i = 0; i < bits01.size(); ++i)
    if (bits01[i]) w[i / 64] |= std::uint64_t{1} << (63 - i % 64);
  return w;
}

std::uint64_t master_key(const std::vector<std::uint8_t>& master) {
  if (master.size() < kMinMasterBytes)
    throw InvalidArgument("master seed must have at least 8 bytes");
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < master.size(); i += 8) {
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < 8 && i + k < master.size(); ++k)
      word |= std::uint64_t{master[i + k]} << (8 * k);
    key = rng::derive(key ^ word, i / 8);
  }
  return key;
}

constexpr std::uint64_t kFingerprintBlock = ~std::uint64_t{0};

}  // namespace

void validate(const ExtractorParams& p) {
  if (p.n == 0 || p.m == 0 || p.m > p.n) throw InvalidArgument("extractor: need 1 <= m <= n");
  if (!(p.eps_sec > 0.0 && p.eps_sec < 1.0))
    throw InvalidArgument("extractor: eps_sec must lie in (0, 1)");
  if (p.seed.size() != p.n + p.m - 1)
    throw DimensionError("extractor: seed must have n + m - 1 bits");
}

std::uint64_t output_length(std::uint64_t n, double h_min, double eps_sec) {
  if (!(h_min >= 0.0 && h_min <= 1.0)) throw InvalidArgument("output_length: h_min in [0, 1]");
  if (!(eps_sec > 0.0 && eps_sec < 1.0))
    throw InvalidArgument("output_length: eps_sec must lie in (0, 1)");
  const double m = std::floor(static_cast<double>(n) * h_min + 2.0 * std::log2(eps_sec));
  return m <= 0.0 ? 0 : static_cast<std::uint64_t>(m);
}

BitStream toeplitz_extract(const BitStream& x, const ExtractorParams& params) {
  validate(params);
  if (x.size() != params.n) throw DimensionError("toeplitz_extract: input must have n bits");
  const std::uint64_t m = params.m;

  // y_i = parity(seed[i .. i+n) & r) with r[k] = x[n-1-k].
  std::vector<std::uint8_t> r = x.unpack();
  std::reverse(r.begin(), r.end());
  const auto rw = words_of(r, 0);
  const std::size_t nw = rw.size();
  const auto sw = words_of(params.seed.unpack(), 1);

  // shifted[s][k] = 64 seed bits starting at bit 64k + s
  std::vector<std::vector<std::uint64_t>> shifted(64);
  for (unsigned s = 0; s < 64; ++s) {
    auto& out = shifted[s];
    out.resize(sw.size() - 1);
    for (std::size_t k = 0; k + 1 < sw.size(); ++k)
      out[k] = s == 0 ? sw[k] : (sw[k] << s) | (sw[k + 1] >> (64 - s));
  }

  BitWriter y;
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto& src = shifted[i % 64];
    const std::size_t base = i / 64;
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < nw; ++k) acc ^= src[base + k] & rw[k];
    y.push(std::popcount(acc) & 1);
  }
  return std::move(y).finish({"extract", std::nullopt, std::nullopt});
}

BitStream expand_seed(const std::vector<std::uint8_t>& master, std::uint64_t block,
                      std::uint64_t bits) {
  std::uint64_t state = rng::derive(master_key(master), block);
  std::vector<std::uint8_t> bytes((bits + 7) / 8);
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    const std::uint64_t word = rng::splitmix64(state);
    for (std::size_t k = 0; k < 8 && i + k < bytes.size(); ++k)
      bytes[i + k] = static_cast<std::uint8_t>(word >> (56 - 8 * k));
  }
  return BitStream(std::move(bytes), bits);
}

std::uint64_t seed_fingerprint(const std::vector<std::uint8_t>& master) {
  if (master.size() < kMinMasterBytes)
    throw InvalidArgument("master seed must have at least 8 bytes");
  const BitStream x(master, master.size() * 8);
  const std::uint64_t n = x.size(), m = 64;
  // A cyclic self-key would make the hash a symmetric quadratic form whose
  // cross terms cancel; key with the master's own expansion instead.
  const BitStream y =
      toeplitz_extract(x, {n, m, kDefaultEpsSec, expand_seed(master, kFingerprintBlock, n + m - 1)});
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i < 64; ++i) out = (out << 1) | (y[i] ? 1U : 0U);
  return out;
}

std::vector<std::uint8_t> os_seed(std::size_t bytes) {
  std::random_device dev;
  std::vector<std::uint8_t> out(bytes);
  for (auto& b : out) b = static_cast<std::uint8_t>(dev());
  return out;
}

ExtractionResult extract_stream(const BitStream& raw, double h_min, double eps_sec,
                                const std::vector<std::uint8_t>& master,
                                std::uint64_t block_bits, unsigned threads) {
  if (block_bits == 0) throw InvalidArgument("extract_stream: block size must be positive");
  ExtractionResult out;
  out.h_min = h_min;
  out.eps_sec = eps_sec;
  out.block_bits = block_bits;
  out.output_per_block = output_length(block_bits, h_min, eps_sec);
  if (out.output_per_block == 0)
    throw UndersizedDataError("extract_stream: nothing certifiable at this h_min and block size");
  out.blocks = raw.size() / block_bits;
  if (out.blocks == 0) throw UndersizedDataError("extract_stream: raw shorter than one block");
  out.dropped_bits = raw.size() - out.blocks * block_bits;
  const std::uint64_t fingerprint = seed_fingerprint(master);

  std::vector<BitStream> parts(out.blocks);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b; (b = next.fetch_add(1)) < out.blocks;) {
      const BitStream x =
          BitStream::from_bits(raw.unpack(b * block_bits, block_bits));
      ExtractorParams p{block_bits, out.output_per_block, eps_sec,
                        expand_seed(master, b, block_bits + out.output_per_block - 1)};
      parts[b] = toeplitz_extract(x, p);
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(threads, out.blocks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  BitWriter w;
  for (const auto& part : parts) w.append(part);
  out.bits = std::move(w).finish({"extract", h_min, fingerprint});
  return out;
}

}  // namespace cqrng::extractor
