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

// Qutrit state tomography from three mutually unbiased bases: synthetic
// counts, maximum-likelihood reconstruction, Uhlmann fidelity and Poisson
// bootstrap error bars.

#include <array>
#include <cstdint>

#include "cqrng/linalg.hpp"

namespace cqrng::tomography {

/// Columns of bases[b] are the basis states: computational, Fourier
/// (w^{jk}/sqrt3) and the quadratic-phase basis (w^{j^2+jk}/sqrt3).
struct MUBSet {
  std::array<linalg::Matrix, 3> bases;
};

MUBSet mub_set();

/// Throws InvalidArgument unless rho is 3x3 Hermitian, PSD within `tol` and
/// of unit trace within `tol`.
void validate_density(const linalg::Matrix& rho, double tol = 1e-9);

struct TomographyData {
  std::array<std::array<std::uint64_t, 3>, 3> counts{};  // [basis][outcome]
  /// Detection efficiency of the detector recording each outcome.
  std::array<double, 3> eta{1.0, 1.0, 1.0};

  friend bool operator==(const TomographyData&, const TomographyData&) = default;
};

/// Born probabilities of every basis outcome.
std::array<std::array<double, 3>, 3> born_table(const linalg::Matrix& rho, const MUBSet& mubs);

/// Multinomial draws of `shots_per_basis` detections per basis with outcome
/// weights eta_k * p_k.
TomographyData simulate_counts(const linalg::Matrix& rho, const MUBSet& mubs,
                               std::uint64_t shots_per_basis, std::uint64_t seed,
                               const std::array<double, 3>& eta = {1.0, 1.0, 1.0});

struct MLEOptions {
  int max_iterations = 5000;
  double tolerance = 1e-9;  // log-likelihood gain per iteration
};

struct MLEResult {
  linalg::Matrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximizes sum n_bk/eta_k * log Tr[rho P_bk] over rho = L^dag L / Tr with
/// L a general complex 3x3 matrix, by gradient ascent with backtracking, starting from
/// the maximally mixed state. Throws UndersizedDataError when a basis has
/// no counts.
MLEResult mle_reconstruct(const TomographyData& data, const MUBSet& mubs,
                          const MLEOptions& opt = {});

/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const linalg::Matrix& rho, const linalg::Matrix& sigma);

struct BootstrapResult {
  linalg::Matrix rho_std;  // element-wise: real part holds std of Re, imag part std of Im
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  int resamples = 0;
};

/// Poisson-resamples every count, re-runs the MLE and reports spreads.
/// Fidelities are taken against `target`. Deterministic for a seed and
/// independent of `threads`.
BootstrapResult bootstrap_uncertainty(const TomographyData& data, const MUBSet& mubs,
                                      const linalg::Matrix& target, int resamples,
                                      std::uint64_t seed, unsigned threads = 1);

}  // namespace cqrng::tomography
