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

// Monte Carlo model of the heralded single-photon experiment.
//
// A round is one pump pulse. Only heralded rounds with at least one signal
// click are recorded as events; the pulses in between are skipped with
// geometric gaps and the heralded-but-dark rounds among them are tallied
// with a single binomial draw. Event probabilities per heralded round are
// computed exactly over the 8 click patterns of the three detectors.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqrng/bitstream.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/mesh.hpp"

namespace cqrng::photonics {

/// Fitted so the default loss budget gives about 282 post-selected bits/s.
inline constexpr double kDefaultHeraldEff = 0.111;

struct SourceParams {
  double rep_rate = 1.25e9;
  double pair_prob = 0.03;
  double herald_eff = kDefaultHeraldEff;

  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

struct ChannelParams {
  double source_loss_db = 11.0;
  double mesh_loss_db = 27.0;
  double per_cell_loss_db = 0.5;
  std::array<double, 3> detector_eff{0.85, 0.83, 0.86};
  double dark_prob = 1e-7;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct NoiseParams {
  /// Per-round Gaussian jitter on every MZI phase, radians.
  double phase_sigma = 0.02;
  /// Calibration residual drawn once per run, radians.
  double static_phase_sigma = 0.0;
  /// Rotation of |v1'> away from |v1>; unset means "tuned to R = 0.93".
  std::optional<double> vprime_misalign;
  bool multi_pair = false;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

/// Signal transmission for a stage with `cells` active cells.
double transmission(const ChannelParams& ch, std::size_t cells);

/// Pentagram with |v1'> misaligned per `noise`, and the plan realizing it.
kcbs::PentagramSet default_set(const NoiseParams& noise);
mesh::StagePlan default_plan(const NoiseParams& noise);

enum class Outcome { bit0, bit1, aux, no_click, multi };
const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct EventRecord {
  std::uint64_t round_id = 0;
  int context = 1;
  bool herald = true;
  std::uint8_t clicks = 0;  // bit k set when detector k fired
  Outcome outcome = Outcome::no_click;

  double timestamp(double rep_rate) const { return static_cast<double>(round_id) / rep_rate; }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Outcome of a heralded round with click mask `clicks` under `modes`.
Outcome classify(std::uint8_t clicks, const kcbs::ContextModes& modes);

enum class Schedule { uniform, sequential };
enum class RoundUnit { pulse, detected };

struct RunOptions {
  /// Pulses, or recorded events when unit == detected. With the sequential
  /// schedule the count applies to each context block.
  std::uint64_t rounds = 100000;
  RoundUnit unit = RoundUnit::pulse;
  Schedule schedule = Schedule::uniform;
  /// Fixed by configuration so results do not depend on the thread count.
  std::uint32_t shards = 8;
  unsigned threads = 1;
  bool keep_events = false;

  friend bool operator==(const RunOptions&, const RunOptions&) = default;
};

inline constexpr std::size_t kJitterSamples = 4096;

/// Per-run quantities derived from the plan after phase errors.
struct SimulationModel {
  std::array<kcbs::ContextModes, kcbs::kContexts> modes;
  std::array<std::array<double, 3>, kcbs::kContexts> born{};     // |<k|V U_prep|0>|^2
  std::array<std::array<double, 8>, kcbs::kContexts> pattern{};  // per heralded round
  std::array<double, kcbs::kContexts> transmission{};
  std::array<double, kcbs::kContexts> event_prob{};              // per pulse
  double herald_prob = 0.0;                                      // per pulse
  double R = 1.0;  // symmetrized overlap of the realized A1, A1'
};

/// Applies the static phase errors drawn from a stream of `seed`, averages
/// the Born weights over per-round jitter (i.i.d. rounds make the average
/// exact in distribution) and tabulates click-pattern probabilities. Throws InvalidArgument when a
/// parameter or derived probability leaves [0, 1].
SimulationModel build_model(const mesh::StagePlan& plan, const SourceParams& src,
                            const ChannelParams& ch, const NoiseParams& noise,
                            std::uint64_t seed);

/// A contiguous piece of the run simulated from one RNG stream.
struct Segment {
  int context = 0;  // 0: uniform over contexts, else fixed 1..5
  std::uint64_t count = 0;
  RoundUnit unit = RoundUnit::pulse;
  std::uint64_t stream = 0;
};

/// Segments in canonical order: shard-major for the uniform schedule,
/// context block then shard for the sequential one.
std::vector<Segment> plan_segments(const RunOptions& opt);

/// Additive counters of one or more segments.
struct Tally {
  std::array<std::array<std::uint64_t, 3>, kcbs::kContexts> single{};  // by detector
  std::array<std::uint64_t, kcbs::kContexts> events{};  // herald and >= 1 click
  std::array<std::uint64_t, kcbs::kContexts> multi{};
  std::uint64_t pulses = 0;
  std::uint64_t heralded = 0;
  BitStream bits;
  std::vector<EventRecord> records;  // round ids relative to this tally
};

Tally run_segment(const SimulationModel& model, const Segment& seg, std::uint64_t seed,
                  bool keep_events);

/// Concatenation: counters add, bits and records of `b` follow those of `a`
/// with b's round ids shifted by a.pulses.
Tally merge(Tally a, const Tally& b);

struct RunSummary {
  Tally tally;
  SimulationModel model;
  std::array<kcbs::ContextModes, kcbs::kContexts> modes;
  kcbs::JointProbTable joint_tables{};
  double duration_s = 0.0;
  double coincidence_rate = 0.0;  // events / duration
  double raw_bit_rate = 0.0;      // post-selected bit rounds / duration
  std::uint64_t seed = 0;
  std::string generator;
};

RunSummary summarize(Tally tally, const SimulationModel& model, const SourceParams& src,
                     const ChannelParams& ch, std::uint64_t seed);

RunSummary run_simulation(const mesh::StagePlan& plan, const SourceParams& src,
                          const ChannelParams& ch, const NoiseParams& noise,
                          const RunOptions& opt, std::uint64_t seed);

/// Post-selected bit rounds per second. Throws when no pulses were run.
double detected_rate(const RunSummary& summary, const SourceParams& src);

struct BitMapStats {
  std::uint64_t kept = 0;
  std::uint64_t aux = 0;
  std::uint64_t no_click = 0;
  std::uint64_t multi = 0;
};

BitStream raw_bit_map(const std::vector<EventRecord>& events, BitMapStats* stats = nullptr);

}  // namespace cqrng::photonics
