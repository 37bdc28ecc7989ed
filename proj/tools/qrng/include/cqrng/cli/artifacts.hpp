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

// Artifact files. Every JSON document carries a "provenance" object and
// every CSV starts with "# key=value" comment lines; parse(emit(x)) == x
// for each type below.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqrng/battery.hpp"
#include "cqrng/certifier.hpp"
#include "cqrng/cli/config.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/photonics.hpp"
#include "cqrng/tomography.hpp"

namespace cqrng::cli {

struct Provenance {
  int format_version = kFormatVersion;
  std::string config_hash;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

Provenance provenance_of(const RunConfig& cfg);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// ---- generic CSV -----------------------------------------------------------

struct CsvDoc {
  Provenance provenance;
  std::vector<std::pair<std::string, std::string>> meta;  // extra comment lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  const std::string* find_meta(const std::string& key) const;
  std::size_t column(const std::string& name) const;  // throws when absent
  friend bool operator==(const CsvDoc&, const CsvDoc&) = default;
};

std::string emit_csv(const CsvDoc& doc);
CsvDoc parse_csv(const std::string& text);

// ---- simulate ----------------------------------------------------------------

struct SimulationSummary {
  Provenance provenance;
  std::string generator;
  std::uint64_t pulses = 0;
  std::uint64_t heralded = 0;
  std::array<std::uint64_t, kcbs::kContexts> events{};
  std::array<std::uint64_t, kcbs::kContexts> multi{};
  double duration_s = 0.0;
  double coincidence_rate = 0.0;
  double raw_bit_rate = 0.0;
  std::uint64_t raw_bits = 0;
  std::uint64_t raw_ones = 0;
  double R = 1.0;  // realized overlap of the simulated plan
  double herald_prob = 0.0;
  std::array<double, kcbs::kContexts> event_prob{};
  std::array<double, kcbs::kContexts> transmission{};

  friend bool operator==(const SimulationSummary&, const SimulationSummary&) = default;
};

SimulationSummary make_summary(const photonics::RunSummary& run, const Provenance& prov);
json to_json(const SimulationSummary& s);
SimulationSummary summary_from_json(const json& j);

struct CountRow {
  int context = 1;
  kcbs::ContextModes modes;
  std::array<std::uint64_t, 3> single{};  // by detector
  std::uint64_t events = 0;
  std::uint64_t multi = 0;

  friend bool operator==(const CountRow&, const CountRow&) = default;
};

struct CountTable {
  Provenance provenance;
  std::array<CountRow, kcbs::kContexts> rows;

  friend bool operator==(const CountTable&, const CountTable&) = default;
};

CountTable make_counts(const photonics::RunSummary& run, const Provenance& prov);
std::string emit_counts(const CountTable& t);
CountTable counts_from_csv(const CsvDoc& doc);
/// Efficiency-corrected joint rows, one per context.
kcbs::JointProbTable joint_from_counts(const CountTable& t, const std::array<double, 3>& eta);

struct EventLog {
  Provenance provenance;
  double rep_rate = 1.0;
  std::vector<photonics::EventRecord> events;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

/// Header line followed by one JSON object per event.
std::string emit_events(const EventLog& log);
EventLog parse_events(const std::string& text);

// ---- analyze -----------------------------------------------------------------

struct JointTableDoc {
  Provenance provenance;
  kcbs::JointProbTable table{};

  friend bool operator==(const JointTableDoc&, const JointTableDoc&) = default;
};

std::string emit_joint(const JointTableDoc& t);
JointTableDoc joint_from_csv(const CsvDoc& doc);
json to_json(const JointTableDoc& t);
JointTableDoc joint_from_json(const json& j);

struct KcbsDoc {
  Provenance provenance;
  kcbs::KCBSResult result;

  friend bool operator==(const KcbsDoc&, const KcbsDoc&) = default;
};

json to_json(const KcbsDoc& d);
KcbsDoc kcbs_from_json(const json& j);

// ---- certify -----------------------------------------------------------------

struct CertificationDoc {
  Provenance provenance;
  certifier::CertificationProblem problem;
  certifier::CertificationResult result;

  friend bool operator==(const CertificationDoc&, const CertificationDoc&) = default;
};

json to_json(const CertificationDoc& d);
CertificationDoc certification_from_json(const json& j);

// ---- extract -----------------------------------------------------------------

struct ExtractionDoc {
  Provenance provenance;
  std::string seed_source;  // "derived", "file" or "os"
  std::uint64_t seed_fingerprint = 0;
  std::uint64_t input_bits = 0;
  std::uint64_t output_bits = 0;
  double h_min = 0.0;
  double eps_sec = 0.0;
  std::uint64_t block_bits = 0;
  std::uint64_t output_per_block = 0;
  std::uint64_t blocks = 0;
  std::uint64_t dropped_bits = 0;

  friend bool operator==(const ExtractionDoc&, const ExtractionDoc&) = default;
};

json to_json(const ExtractionDoc& d);
ExtractionDoc extraction_from_json(const json& j);

// ---- battery -----------------------------------------------------------------

struct BatteryDoc {
  Provenance provenance;
  std::string input;  // file name of the tested stream
  double alpha = battery::kAlpha;
  battery::BatteryReport report;

  friend bool operator==(const BatteryDoc&, const BatteryDoc&) = default;
};

json to_json(const BatteryDoc& d);
BatteryDoc battery_from_json(const json& j);
/// Fixed-width text table.
std::string battery_table(const battery::BatteryReport& r);

// ---- tomo --------------------------------------------------------------------

using Real3x3 = std::array<std::array<double, 3>, 3>;

struct TomographyDoc {
  Provenance provenance;
  std::string source;  // "simulated" or the input file name
  tomography::TomographyData data;
  Real3x3 rho_re{};
  Real3x3 rho_im{};
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double fidelity = 0.0;  // against the optimal state
  int resamples = 0;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  Real3x3 rho_std_re{};
  Real3x3 rho_std_im{};

  friend bool operator==(const TomographyDoc&, const TomographyDoc&) = default;
};

json to_json(const TomographyDoc& d);
TomographyDoc tomography_from_json(const json& j);
json to_json(const tomography::TomographyData& d);
tomography::TomographyData tomography_data_from_json(const json& j);

// ---- curve -------------------------------------------------------------------

struct CurveDoc {
  Provenance provenance;
  double round_rate = 0.0;
  bool monotone = true;
  std::vector<certifier::CurvePoint> points;

  friend bool operator==(const CurveDoc&, const CurveDoc&) = default;
};

std::string emit_curve(const CurveDoc& d);
CurveDoc curve_from_csv(const CsvDoc& doc);
json to_json(const CurveDoc& d);
CurveDoc curve_from_json(const json& j);

// ---- report ------------------------------------------------------------------

struct ReportDoc {
  Provenance provenance;
  std::optional<SimulationSummary> summary;
  std::optional<JointTableDoc> joint;
  std::optional<KcbsDoc> kcbs;
  std::optional<CertificationDoc> certification;
  std::optional<ExtractionDoc> extraction;
  std::optional<BatteryDoc> battery;
  std::optional<TomographyDoc> tomography;
  std::optional<CurveDoc> curve;

  friend bool operator==(const ReportDoc&, const ReportDoc&) = default;
};

json to_json(const ReportDoc& d);
ReportDoc report_from_json(const json& j);
std::string report_markdown(const ReportDoc& d);

/// Pretty JSON text with a trailing newline.
std::string dump(const json& j);

}  // namespace cqrng::cli
