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

// Programmable MZI mesh: one 2x2 transfer per active cell, the ordered
// product over a stage, and synthesis of the state-preparation and
// measurement stages for the five KCBS contexts.
//
// Cell convention (Delta = phi2 - phi1, Sigma = (phi1 + phi2)/2):
//
//   U = i e^{i Sigma} [[ sin(Delta/2),  cos(Delta/2)],
//                      [ cos(Delta/2), -sin(Delta/2)]]
//
// so Delta = pi is BAR and Delta = 0 is CROSS. Idle cells of the physical
// hexagonal lattice are identity and are not listed.

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cqrng/kcbs.hpp"
#include "cqrng/linalg.hpp"

namespace cqrng::mesh {

/// Phase of the common-mode shifter that makes a cell a real reflection.
inline constexpr double kRealCellSigma = 1.5 * 3.14159265358979323846;

/// Reduces an angle to [0, 2pi).
double canonical_angle(double phi);

struct MZISetting {
  double phi1 = 0.0;
  double phi2 = 0.0;

  /// Both phases reduced to [0, 2pi).
  static MZISetting canonical(double phi1, double phi2);
  static MZISetting from_delta(double delta, double sigma = kRealCellSigma);

  double delta() const { return phi2 - phi1; }
  double sigma() const { return 0.5 * (phi1 + phi2); }

  friend bool operator==(const MZISetting&, const MZISetting&) = default;
};

struct CellSetting {
  std::string cell;
  MZISetting setting;
  std::pair<std::size_t, std::size_t> modes{0, 1};
  int layer = 0;

  friend bool operator==(const CellSetting&, const CellSetting&) = default;
};

struct MeshConfig {
  std::vector<CellSetting> settings;  // propagation order
  std::size_t dim = 3;
  std::string label;

  friend bool operator==(const MeshConfig&, const MeshConfig&) = default;
};

struct StagePlan {
  MeshConfig prep;
  std::array<MeshConfig, kcbs::kContexts> contexts;
  std::array<kcbs::ContextModes, kcbs::kContexts> modes;
  std::vector<double> theta_values;  // prep then contexts, in cell order

  std::size_t active_cells(std::size_t context) const;

  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

linalg::Matrix mzi_transfer(const MZISetting& s);

/// Ordered product of the embedded cell transfers. Rejects non-adjacent mode
/// pairs, layers listed out of order, and two cells on one mode in the same
/// layer.
linalg::Matrix mesh_unitary(const MeshConfig& cfg);

/// Two-cell cascade (modes (0,1) then (1,2)) sending input mode 0 to a
/// unit 3-vector with non-negative real amplitudes. Returns (Delta1, Delta2).
std::pair<double, double> synthesize_prep(const linalg::Vector& target);
MeshConfig prep_config(double theta1, double theta2);

/// Measurement stage for context `context` (1-based): row `modes.first` of
/// the returned unitary is <v_i| up to phase, row `modes.second` is
/// <v_{i+1}| (or <v1'| in context 5). Real targets use a closed-form
/// three-cell elimination; complex targets fall back to least squares over
/// the shortest cascade that reaches residual 1e-8.
MeshConfig synthesize_context(std::size_t context, const kcbs::PentagramSet& set,
                              const kcbs::ContextModes& modes = {});

/// Detector roles per context mirroring the D2/D3/D4 columns of the
/// reference joint-probability table.
std::array<kcbs::ContextModes, kcbs::kContexts> reference_mode_map();

/// Prep stage for `state` plus all five context stages.
StagePlan build_plan(const kcbs::PentagramSet& set, const linalg::Vector& state,
                     const std::array<kcbs::ContextModes, kcbs::kContexts>& modes =
                         reference_mode_map());

/// Largest deviation between |rows| of `u` and the targets, up to row phase.
double row_residual(const linalg::Matrix& u, const kcbs::PentagramSet& set, std::size_t context,
                    const kcbs::ContextModes& modes);

}  // namespace cqrng::mesh
