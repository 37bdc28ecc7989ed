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

// Run configuration: one JSON document per run. Missing keys take their
// defaults, unknown keys are rejected with the dotted key path.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqrng/certifier.hpp"
#include "cqrng/extractor.hpp"
#include "cqrng/mesh.hpp"
#include "cqrng/photonics.hpp"

namespace cqrng::cli {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
/// Post-selected rounds per second used when no simulation summary exists.
inline constexpr double kReferenceRoundRate = 282.0;

struct PlanSpec {
  bool use_default = true;   // "default-kcbs"
  mesh::StagePlan custom;    // used when use_default is false

  friend bool operator==(const PlanSpec&, const PlanSpec&) = default;
};

struct AnalysisConfig {
  double overlap = 0.93;
  double overlap_sigma = 0.0;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct CertifierConfig {
  std::optional<double> chi_hat;  // unset: taken from kcbs.json
  std::optional<double> delta;
  double R_lo = 0.92;
  double R_hi = 0.94;
  double eps_com = 0.047;
  std::optional<std::array<double, 3>> eta;  // unset: channel.detector_eff
  std::optional<std::uint64_t> n_rounds;     // unset: smallest per-context event count
  double eps_fin = 2e-11;
  std::optional<double> round_rate;          // unset: summary raw_bit_rate
  certifier::SolverOptions solver;
  certifier::AttackOptions attack;

  friend bool operator==(const CertifierConfig& a, const CertifierConfig& b);
};

struct ExtractorConfig {
  double eps_sec = extractor::kDefaultEpsSec;
  std::uint64_t block_bits = extractor::kDefaultBlockBits;
  std::optional<std::string> seed_file;
  bool os_seed = false;

  friend bool operator==(const ExtractorConfig&, const ExtractorConfig&) = default;
};

struct TomographyConfig {
  std::uint64_t shots_per_basis = 10000;
  int bootstrap = 100;  // 0 disables; otherwise at least 100
  int max_iterations = 5000;
  double tolerance = 1e-9;
  std::optional<std::array<double, 3>> eta;  // unset: ideal detectors

  friend bool operator==(const TomographyConfig&, const TomographyConfig&) = default;
};

struct CurveConfig {
  std::size_t points = 11;
  std::optional<std::vector<double>> grid;
  std::optional<double> round_rate;

  friend bool operator==(const CurveConfig&, const CurveConfig&) = default;
};

struct RunConfig {
  int format_version = kFormatVersion;
  photonics::SourceParams source;
  photonics::ChannelParams channel;
  photonics::NoiseParams noise;
  PlanSpec plan;
  photonics::RunOptions run;  // threads is ignored; QRNG_THREADS decides
  AnalysisConfig analysis;
  CertifierConfig certifier;
  ExtractorConfig extractor;
  TomographyConfig tomography;
  CurveConfig curve;
  std::uint64_t seed = 1;
  std::string output_dir = "qrng-out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Presets: "reference", "upgraded", "ideal". Throws ConfigError otherwise.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Strict parse; throws ConfigError carrying the offending key.
RunConfig parse_config(const json& doc);
RunConfig parse_config_text(const std::string& text);
json to_json(const RunConfig& cfg);

/// Range checks beyond types (probabilities, positive counts, ...).
void validate(const RunConfig& cfg);

/// FNV-1a of the canonical document with output_dir removed, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// The plan the simulator runs.
mesh::StagePlan resolve_plan(const RunConfig& cfg);
certifier::CertificationProblem certification_problem(const RunConfig& cfg);

}  // namespace cqrng::cli
