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

// The qrng subcommands. Each reads its inputs from, and writes its
// artifacts to, the run's output directory unless a path is given.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cqrng/cli/config.hpp"

namespace cqrng::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitUndersized = 4;

/// Artifact file names inside the output directory.
namespace files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kCounts = "counts.csv";
inline constexpr const char* kEvents = "events.jsonl";
inline constexpr const char* kRaw = "raw.cqrn";
inline constexpr const char* kJoint = "joint_table.csv";
inline constexpr const char* kKcbs = "kcbs.json";
inline constexpr const char* kCertification = "certification.json";
inline constexpr const char* kExtracted = "extracted.cqrn";
inline constexpr const char* kExtraction = "extraction.json";
inline constexpr const char* kBattery = "battery.json";
inline constexpr const char* kTomography = "tomography.json";
inline constexpr const char* kCurveCsv = "curve.csv";
inline constexpr const char* kCurveSvg = "curve.svg";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportMd = "report.md";
}  // namespace files

/// Sub-stream indices of the run seed.
inline constexpr std::uint64_t kTomographyStream = 0x746f6d6fULL;
inline constexpr std::uint64_t kExtractorStream = 0x65787472ULL;

struct AnalyzeOptions {
  std::optional<std::string> input;  // counts.csv or a joint table CSV
};

struct CertifyOptions {
  std::optional<std::string> kcbs;     // ignored when certifier.chi_hat is set
  std::optional<std::string> summary;  // optional source of n_rounds and the rate
};

struct ExtractOptions {
  std::optional<std::string> input;
  std::optional<std::string> certification;
};

struct BatteryOptions {
  std::optional<std::string> input;
};

struct TomoOptions {
  std::optional<std::string> input;  // {"counts": [[...]], "eta": [...]}
};

void cmd_simulate(const RunConfig& cfg, unsigned threads, std::ostream& log);
void cmd_analyze(const RunConfig& cfg, const AnalyzeOptions& opt, std::ostream& log);
void cmd_certify(const RunConfig& cfg, const CertifyOptions& opt, std::ostream& log);
void cmd_extract(const RunConfig& cfg, const ExtractOptions& opt, unsigned threads,
                 std::ostream& log);
void cmd_battery(const RunConfig& cfg, const BatteryOptions& opt, unsigned threads,
                 std::ostream& log);
void cmd_tomo(const RunConfig& cfg, const TomoOptions& opt, unsigned threads, std::ostream& log);
void cmd_curve(const RunConfig& cfg, unsigned threads, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);

/// 32-byte master seed derived from the run seed.
std::vector<std::uint8_t> derived_master_seed(std::uint64_t seed);

/// Full command line without the program name. Errors go to `err` as one
/// JSON object per line; the return value is the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cqrng::cli
