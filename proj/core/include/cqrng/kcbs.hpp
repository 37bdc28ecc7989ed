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

// KCBS contextuality mathematics on a single qutrit: the pentagram of
// projectors, the optimal state, the original and modified five-term
// functionals and the A1/A1' overlap parameter.
//
// Observables are 1-indexed in reports (A1..A5, A6 == A1). Internally the
// arrays are 0-indexed, so vectors[k] is |v_{k+1}>.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "cqrng/linalg.hpp"

namespace cqrng::kcbs {

inline constexpr std::size_t kContexts = 5;

/// 5 - 4*sqrt(5), the quantum minimum of the five-term sum.
double quantum_bound();
/// -3, the non-contextual bound.
inline constexpr double kClassicalBound = -3.0;

struct PentagramSet {
  std::array<linalg::Vector, kContexts> vectors;
  linalg::Vector vprime;     // |v1'>, equal to |v1> in the ideal set
  linalg::Matrix rotation;   // W with W (0,0,1)^T = |psi0>

  /// The pair measured in context `i` (1-based). Context 5 pairs |v5> with
  /// |v1'>.
  const linalg::Vector& first(std::size_t context) const;
  const linalg::Vector& second(std::size_t context) const;
};

/// Dichotomic observable I - 2|v><v|.
linalg::Matrix observable(const linalg::Vector& v);

/// Ideal pentagram aligned with optimal_state().
PentagramSet pentagram();

/// (5^{-1/4}, 5^{-1/4}, sqrt(1 - 2/sqrt(5))).
linalg::Vector optimal_state();

/// One context of a joint probability table. Entries are
/// P(A_i, A_{i+1}) for the four sign combinations.
struct JointRow {
  double p_minus_plus = 0.0;
  double p_plus_plus = 0.0;
  double p_plus_minus = 0.0;
  double p_minus_minus = 0.0;
  // One standard deviation each.
  double sigma_minus_plus = 0.0;
  double sigma_plus_plus = 0.0;
  double sigma_plus_minus = 0.0;
  double sigma_minus_minus = 0.0;
  // Standard deviation of the derived correlator; zero means "propagate from
  // the entry sigmas".
  double term_sigma = 0.0;

  friend bool operator==(const JointRow&, const JointRow&) = default;
};

using JointProbTable = std::array<JointRow, kContexts>;

/// <A_i A_j> = P(+,+) + P(-,-) - P(+,-) - P(-,+).
double expectation_from_joint(const JointRow& row);
/// One standard deviation of expectation_from_joint, first-order Gaussian.
double expectation_sigma(const JointRow& row);

/// The five correlators <A_i A_{i+1}> for a state. With `use_prime` the last
/// term is <A5 A1'> as measured in context 5; otherwise it is <A5 A1>.
/// Products use the symmetrized (real) part.
std::array<double, kContexts> term_values(const linalg::Matrix& rho, const PentagramSet& set,
                                          bool use_prime);

/// Original functional sum_i <A_i A_{i+1}> for a pure state.
double kcbs_value(const linalg::Vector& state, const PentagramSet& set);
/// Same for a density matrix.
double kcbs_value(const linalg::Matrix& rho, const PentagramSet& set);

/// sum(terms) + (1 - overlap).
double modified_kcbs(std::span<const double, kContexts> terms, double overlap);

/// Tr[rho (A1 A1' + A1' A1)/2].
double overlap_R(const PentagramSet& set, const linalg::Vector& state);
double overlap_R(const PentagramSet& set, const linalg::Matrix& rho);

/// Rotates |v1'> away from |v1> by `angle` inside the plane orthogonal to
/// |v5>, so context 5 stays a valid orthogonal pair. The relative phase of
/// the rotation is chosen to keep <state|Pi1'|state> = <state|Pi1|state>.
PentagramSet misalign_prime(const PentagramSet& set, double angle,
                            const linalg::Vector& state);

/// Smallest misalignment angle whose overlap_R on `state` equals `target`.
/// Requires target in (R(pi/2), 1].
double misalignment_for_overlap(const PentagramSet& set, const linalg::Vector& state,
                                double target);

/// Output-mode roles for one context: the detector whose click means
/// A_i = -1, the one meaning A_{i+1} = -1, and the auxiliary mode.
struct ContextModes {
  std::size_t first = 0;
  std::size_t second = 1;
  std::size_t aux = 2;

  friend bool operator==(const ContextModes&, const ContextModes&) = default;
};

/// Divides per-mode counts by detector efficiency and normalizes. The first
/// and second modes map to P(-,+) and P(+,-), aux to P(+,+); P(-,-) = 0.
/// Sigmas follow from Poisson counts (sigma = sqrt(c)).
JointRow efficiency_correct(std::span<const std::uint64_t, 3> counts,
                            std::span<const double, 3> eta, const ContextModes& modes = {});

struct KCBSResult {
  double chi = 0.0;       // five-term sum
  double chi_mod = 0.0;   // chi + (1 - R)
  std::array<double, kContexts> terms{};
  std::array<double, kContexts> term_sigmas{};
  double R = 1.0;
  double R_sigma = 0.0;
  double sigma = 0.0;     // of chi_mod

  friend bool operator==(const KCBSResult&, const KCBSResult&) = default;
};

/// Joint-table pipeline: correlators from joint rows, the modified sum with the
/// supplied overlap, and first-order uncertainty.
KCBSResult analyze_table(const JointProbTable& table, double overlap, double overlap_sigma = 0.0);

}  // namespace cqrng::kcbs
