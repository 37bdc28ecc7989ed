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

#include <cmath>
#include <complex>
#include <random>

#include "cqrng/linalg.hpp"

namespace cqrng::testing {

inline linalg::Vector random_state(std::mt19937_64& rng, std::size_t dim = 3) {
  std::normal_distribution<double> g;
  linalg::Vector v(dim);
  for (std::size_t k = 0; k < dim; ++k) v[k] = {g(rng), g(rng)};
  return v.normalized();
}

inline linalg::Matrix random_hermitian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  linalg::Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    m(i, i) = g(rng);
    for (std::size_t j = i + 1; j < dim; ++j) {
      m(i, j) = {g(rng), g(rng)};
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

inline double max_diff(const linalg::Matrix& a, const linalg::Matrix& b) {
  return linalg::max_abs(a - b);
}

}  // namespace cqrng::testing
