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

// Min-entropy certification of post-selected KCBS bits.
//
// Upper bound: a moment-matrix relaxation over the words
// {1, Pi1..Pi5, Pi1'}. The adversary's guess is a vector g in {0,1}^5 (one
// guess per context); the relaxation keeps one 7x7 real PSD block Gamma^g
// per guess vector with projectivity inside each block, while
// orthogonality, overlap and the KCBS constraint act on T = sum_g Gamma^g.
// Feasibility of "guess probability >= p" is decided by alternating
// projections and p is bisected.
//
// Lower bound: explicit ensembles of dimension-3 models, each member with
// its own projector chain satisfying the commutator bound.
//
// Guess probability is pooled over contexts: expected correct guesses over
// expected post-selected rounds, with the first-mode click weighted by an
// efficiency ratio w (both endpoints of its allowed interval are tried).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqrng/linalg.hpp"

namespace cqrng::certifier {

struct CertificationProblem {
  double chi_hat = -3.92;         // observed five-term sum
  std::optional<double> delta;    // unset: hoeffding_delta(n_rounds, eps_fin)
  double R_lo = 0.92;
  double R_hi = 0.94;
  double eps_com = 0.047;
  std::array<double, 3> eta{0.85, 0.83, 0.86};
  std::uint64_t n_rounds = 100000;
  double eps_fin = 2e-11;

  friend bool operator==(const CertificationProblem&, const CertificationProblem&) = default;
};

/// Throws InvalidArgument when a field violates its range.
void validate(const CertificationProblem& prob);

/// n_terms * sqrt(ln(2/eps_fin) / (2n)).
double hoeffding_delta(std::uint64_t n, double eps_fin, int n_terms = 5);

/// chi_hat + delta: the finite-size shift points toward the classical bound.
double worst_case_chi(double chi_hat, double delta);

double effective_delta(const CertificationProblem& prob);
double worst_case_chi(const CertificationProblem& prob);

/// Efficiency-ratio interval [min eta / max eta, max eta / min eta].
std::pair<double, double> weight_interval(const std::array<double, 3>& eta);

/// Largest overlap |<a|b>| of rank-1 projectors whose observables satisfy
/// ||[A_a, A_b]|| <= eps on the small-overlap branch.
double max_overlap(double eps_com);

struct SolverOptions {
  double bisect_tol = 1e-4;
  int max_sweeps = 20000;
  double feas_tol = 1e-7;
};

struct SolverDiagnostics {
  int bisection_steps = 0;
  long long sweeps = 0;
  double width = 0.0;           // final bisection bracket
  double min_eigenvalue = 0.0;  // of the last feasible point
  double affine_residual = 0.0;
  double weight = 1.0;          // efficiency ratio achieving the bound
  bool stagnated = false;

  friend bool operator==(const SolverDiagnostics&, const SolverDiagnostics&) = default;
};

/// Outcome of one feasibility test.
struct Feasibility {
  bool feasible = false;
  bool stagnated = false;  // hit max_sweeps without a decision
  int sweeps = 0;
  double min_eigenvalue = 0.0;
  double affine_residual = 0.0;
  double gap = 0.0;
  // Feasible only: 32 row-major 7x7 blocks Gamma^g, g = sum_c g_c 2^c, over
  // the words (1, Pi1..Pi5, Pi1'), followed by the slack values.
  std::vector<double> moments;
};

inline constexpr std::size_t kMomentWords = 7;
inline constexpr std::size_t kGuessVectors = 32;

/// Is "pooled guess probability >= p" compatible with the constraints at
/// worst-case value `chi_wc` and efficiency ratio `w`? `warm` carries the
/// iterate between calls (may be empty).
Feasibility relaxation_feasible(const CertificationProblem& prob, double chi_wc, double w,
                                double p, std::vector<double>& warm,
                                const SolverOptions& opt = {});

struct BoundResult {
  double p_guess = 1.0;
  SolverDiagnostics diagnostics;
};

/// Smallest certified upper bound on the guess probability: the largest
/// feasible p found by bisection plus the bisection tolerance, capped at 1.
/// Throws InfeasibleError when the constraints admit no model at all.
BoundResult relaxation_bound(const CertificationProblem& prob, double chi_wc,
                             const SolverOptions& opt = {});
BoundResult relaxation_bound(const CertificationProblem& prob, const SolverOptions& opt = {});

struct AttackOptions {
  int restarts = 8;
  int rounds = 6;
  std::size_t ensemble_size = 6;
  std::uint64_t seed = 1;
};

struct AttackMember {
  double weight = 0.0;
  linalg::Vector state;
  std::array<linalg::Vector, 6> vectors;  // v1..v5, v1'
};

struct AttackResult {
  bool feasible = false;
  double p_guess = 0.5;
  double weight = 1.0;  // efficiency ratio used
  double chi = 0.0;     // ensemble five-term sum
  double R = 1.0;
  double max_commutator = 0.0;
  std::vector<AttackMember> members;
};

/// Best explicit model found. Every returned model is re-verified with
/// spectral norms and exact aggregates; feasible == false means none was
/// found.
AttackResult attack_search(const CertificationProblem& prob, double chi_wc,
                           const AttackOptions& opt = {});
AttackResult attack_search(const CertificationProblem& prob, const AttackOptions& opt = {});

struct CertificationResult {
  double chi_worst = 0.0;
  double delta = 0.0;
  double p_guess_upper = 1.0;
  double p_guess_attack = 0.5;
  bool attack_feasible = false;
  double h_min = 0.0;
  double round_rate = 0.0;
  double rate = 0.0;
  SolverDiagnostics diagnostics;

  friend bool operator==(const CertificationResult&, const CertificationResult&) = default;
};

/// -log2(p), clamped at 0.
double min_entropy(double p_guess);

/// h_min * round_rate.
double certified_rate(double h_min, double round_rate);
double certified_rate(const CertificationResult& result, double round_rate);

CertificationResult certify(const CertificationProblem& prob, double round_rate,
                            const SolverOptions& solver = {}, const AttackOptions& attack = {});

struct CurvePoint {
  double chi = 0.0;
  double h_min = 0.0;
  double rate = 0.0;
  double p_guess_upper = 1.0;
  bool ok = true;
  std::string error;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct Curve {
  std::vector<CurvePoint> points;
  bool monotone = true;  // h_min non-increasing in chi over solved points
};

/// Evenly spaced grid of `n` worst-case values from -3 down to 5 - 4 sqrt5.
std::vector<double> default_grid(std::size_t n = 11);

/// One relaxation solve per grid value (taken as the worst-case chi).
Curve rate_curve(const CertificationProblem& base, const std::vector<double>& chi_grid,
                 double round_rate, const SolverOptions& opt = {}, unsigned threads = 1);

}  // namespace cqrng::certifier
