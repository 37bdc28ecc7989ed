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

#include "cqrng/photonics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <random>
#include <thread>

#include "cqrng/error.hpp"
#include "cqrng/rng.hpp"

namespace cqrng::photonics {

using kcbs::kContexts;
using linalg::Matrix;
using linalg::Vector;

namespace {

// Stream indices of the phase errors; segment streams count up from 0.
constexpr std::uint64_t kStaticStream = std::uint64_t{1} << 63;
constexpr std::uint64_t kJitterStream = kStaticStream + 1;

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

void validate(const SourceParams& src, const ChannelParams& ch, const NoiseParams& noise) {
  if (!(src.rep_rate > 0.0) || !std::isfinite(src.rep_rate))
    throw InvalidArgument("rep_rate must be positive");
  require_probability(src.pair_prob, "pair_prob");
  if (!(src.herald_eff > 0.0 && src.herald_eff <= 1.0))
    throw InvalidArgument("herald_eff must lie in (0, 1]");
  for (double l : {ch.source_loss_db, ch.mesh_loss_db, ch.per_cell_loss_db})
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("losses must be non-negative");
  for (double e : ch.detector_eff)
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("detector_eff must lie in (0, 1]");
  require_probability(ch.dark_prob, "dark_prob");
  for (double sigma : {noise.phase_sigma, noise.static_phase_sigma})
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw InvalidArgument("phase_sigma must be non-negative");
}

mesh::MeshConfig perturb(mesh::MeshConfig cfg, double sigma, std::mt19937_64& g) {
  if (sigma == 0.0) return cfg;
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& c : cfg.settings) {
    const double d1 = n(g);
    const double d2 = n(g);
    c.setting = mesh::MZISetting::canonical(c.setting.phi1 + d1, c.setting.phi2 + d2);
  }
  return cfg;
}

// Vector measured by detector `mode` after `v`: V^dagger |mode>.
Vector measured(const Matrix& v, std::size_t mode) {
  Vector out(v.dim());
  for (std::size_t k = 0; k < v.dim(); ++k) out[k] = std::conj(v(mode, k));
  return out;
}

std::array<double, 8> click_patterns(const std::array<double, 3>& born, double t,
                                     const ChannelParams& ch, double second_pair) {
  std::array<double, 3> a{};
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) sum += a[k] = t * born[k] * ch.detector_eff[k];
  std::array<double, 8> dist{};
  dist[0] = 1.0 - sum;
  for (std::size_t k = 0; k < 3; ++k) dist[1u << k] = a[k];
  if (second_pair > 0.0) {
    std::array<double, 8> next{};
    for (unsigned s = 0; s < 8; ++s) {
      next[s] += dist[s] * (1.0 - second_pair * sum);
      for (unsigned k = 0; k < 3; ++k) next[s | (1u << k)] += dist[s] * second_pair * a[k];
    }
    dist = next;
  }
  for (unsigned k = 0; k < 3; ++k) {
    std::array<double, 8> next{};
    for (unsigned s = 0; s < 8; ++s) {
      next[s | (1u << k)] += dist[s] * ch.dark_prob;
      next[s] += dist[s] * (1.0 - ch.dark_prob);
    }
    dist = next;
  }
  return dist;
}

// Inverse-transform geometric: failures before the first success.
std::uint64_t geometric_gap(double q, std::mt19937_64& g) {
  const double u = rng::open_uniform(g);
  if (q >= 1.0) return 0;
  const double gap = std::floor(std::log(u) / std::log1p(-q));
  if (gap >= 9.0e18) return std::uint64_t{9'000'000'000'000'000'000ULL};
  return static_cast<std::uint64_t>(gap);
}

template <std::size_t N>
std::size_t pick(const std::array<double, N>& cumulative, double u) {
  for (std::size_t k = 0; k + 1 < N; ++k)
    if (u < cumulative[k]) return k;
  return N - 1;
}

}  // namespace

double transmission(const ChannelParams& ch, std::size_t cells) {
  const double db =
      ch.source_loss_db + ch.mesh_loss_db + static_cast<double>(cells) * ch.per_cell_loss_db;
  return std::pow(10.0, -db / 10.0);
}

kcbs::PentagramSet default_set(const NoiseParams& noise) {
  const kcbs::PentagramSet ideal = kcbs::pentagram();
  const Vector psi = kcbs::optimal_state();
  const double angle = noise.vprime_misalign ? *noise.vprime_misalign
                                             : kcbs::misalignment_for_overlap(ideal, psi, 0.93);
  return kcbs::misalign_prime(ideal, angle, psi);
}

mesh::StagePlan default_plan(const NoiseParams& noise) {
  return mesh::build_plan(default_set(noise), kcbs::optimal_state());
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::bit0: return "bit0";
    case Outcome::bit1: return "bit1";
    case Outcome::aux: return "aux";
    case Outcome::no_click: return "no_click";
    case Outcome::multi: return "multi";
  }
  return "no_click";
}

Outcome outcome_from_string(const std::string& s) {
  for (Outcome o : {Outcome::bit0, Outcome::bit1, Outcome::aux, Outcome::no_click, Outcome::multi})
    if (s == to_string(o)) return o;
  throw InvalidArgument("unknown outcome '" + s + "'");
}

Outcome classify(std::uint8_t clicks, const kcbs::ContextModes& modes) {
  if (clicks == 0) return Outcome::no_click;
  if (std::popcount(clicks) > 1) return Outcome::multi;
  if (clicks == (1u << modes.first)) return Outcome::bit0;
  if (clicks == (1u << modes.second)) return Outcome::bit1;
  return Outcome::aux;
}

SimulationModel build_model(const mesh::StagePlan& plan, const SourceParams& src,
                            const ChannelParams& ch, const NoiseParams& noise,
                            std::uint64_t seed) {
  validate(src, ch, noise);
  SimulationModel m;
  m.modes = plan.modes;
  m.herald_prob = src.pair_prob * src.herald_eff;

  // Static residuals first, then the calibrated plan is jittered per round.
  std::mt19937_64 gs = rng::stream(seed, kStaticStream);
  mesh::StagePlan actual = plan;
  actual.prep = perturb(plan.prep, noise.static_phase_sigma, gs);
  for (auto& c : actual.contexts) c = perturb(c, noise.static_phase_sigma, gs);

  const std::size_t draws = noise.phase_sigma > 0.0 ? kJitterSamples : 1;
  std::mt19937_64 gj = rng::stream(seed, kJitterStream);
  double r_sum = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    const Vector psi =
        mesh::mesh_unitary(perturb(actual.prep, noise.phase_sigma, gj)) * Vector::basis(3, 0);
    kcbs::PentagramSet realized;
    for (std::size_t c = 0; c < kContexts; ++c) {
      const Matrix v = mesh::mesh_unitary(perturb(actual.contexts[c], noise.phase_sigma, gj));
      const Vector out = v * psi;
      for (std::size_t k = 0; k < 3; ++k) m.born[c][k] += std::norm(out[k]);
      realized.vectors[c] = measured(v, plan.modes[c].first);
      if (c == 4) realized.vprime = measured(v, plan.modes[c].second);
    }
    r_sum += kcbs::overlap_R(realized, psi);
  }
  m.R = r_sum / static_cast<double>(draws);

  const double second = noise.multi_pair ? src.pair_prob : 0.0;
  for (std::size_t c = 0; c < kContexts; ++c) {
    for (double& b : m.born[c]) b /= static_cast<double>(draws);
    m.transmission[c] = transmission(ch, plan.active_cells(c + 1));
    m.pattern[c] = click_patterns(m.born[c], m.transmission[c], ch, second);
    for (double p : m.pattern[c])
      if (!(p >= -1e-15 && p <= 1.0 + 1e-15))
        throw InvalidArgument("derived click probability outside [0, 1]");
    m.event_prob[c] = m.herald_prob * std::clamp(1.0 - m.pattern[c][0], 0.0, 1.0);
  }
  return m;
}

std::vector<Segment> plan_segments(const RunOptions& opt) {
  if (opt.shards == 0) throw InvalidArgument("shards must be at least 1");
  std::vector<Segment> segs;
  auto split = [&](int context, std::uint64_t total) {
    const std::uint64_t base = total / opt.shards, extra = total % opt.shards;
    for (std::uint32_t s = 0; s < opt.shards; ++s) {
      const std::uint64_t n = base + (s < extra ? 1 : 0);
      segs.push_back({context, n, opt.unit, segs.size()});
    }
  };
  if (opt.schedule == Schedule::uniform) {
    split(0, opt.rounds);
  } else {
    for (int c = 1; c <= static_cast<int>(kContexts); ++c) split(c, opt.rounds);
  }
  return segs;
}

Tally run_segment(const SimulationModel& model, const Segment& seg, std::uint64_t seed,
                  bool keep_events) {
  if (seg.context < 0 || seg.context > static_cast<int>(kContexts))
    throw InvalidArgument("segment context must be 0..5");
  std::array<double, kContexts> weight{};
  if (seg.context == 0) {
    weight.fill(1.0 / kContexts);
  } else {
    weight[static_cast<std::size_t>(seg.context - 1)] = 1.0;
  }
  double q = 0.0, quiet = 0.0;
  std::array<double, kContexts> ctx_cum{};
  for (std::size_t c = 0; c < kContexts; ++c) {
    q += weight[c] * model.event_prob[c];
    quiet += weight[c] * model.herald_prob * model.pattern[c][0];
    ctx_cum[c] = q;
  }
  std::array<std::array<double, 7>, kContexts> pat_cum{};
  for (std::size_t c = 0; c < kContexts; ++c) {
    const double norm = 1.0 - model.pattern[c][0];
    double acc = 0.0;
    for (std::size_t s = 1; s < 8; ++s) {
      acc += norm > 0.0 ? model.pattern[c][s] / norm : 0.0;
      pat_cum[c][s - 1] = acc;
    }
  }
  if (q > 0.0)
    for (auto& x : ctx_cum) x /= q;

  Tally t;
  if (seg.count == 0) return t;
  if (q <= 0.0) {
    if (seg.unit == RoundUnit::detected)
      throw InvalidArgument("no detectable events: derived event probability is zero");
    t.pulses = seg.count;
  }

  std::mt19937_64 g = rng::stream(seed, seg.stream);
  BitWriter bits;
  std::uint64_t pos = 0, n_events = 0;
  while (q > 0.0) {
    if (seg.unit == RoundUnit::detected && n_events == seg.count) break;
    const std::uint64_t gap = geometric_gap(q, g);
    if (seg.unit == RoundUnit::pulse && (gap >= seg.count - pos)) {
      pos = seg.count;
      break;
    }
    const std::uint64_t round = pos + gap;
    pos = round + 1;
    std::size_t c = static_cast<std::size_t>(seg.context - 1);
    if (seg.context == 0) c = pick(ctx_cum, rng::open_uniform(g));
    const auto clicks = static_cast<std::uint8_t>(pick(pat_cum[c], rng::open_uniform(g)) + 1);
    const Outcome o = classify(clicks, model.modes[c]);
    ++n_events;
    ++t.events[c];
    if (o == Outcome::multi) {
      ++t.multi[c];
    } else {
      ++t.single[c][static_cast<std::size_t>(std::countr_zero(clicks))];
    }
    if (o == Outcome::bit0 || o == Outcome::bit1) bits.push(o == Outcome::bit1);
    if (keep_events) t.records.push_back({round, static_cast<int>(c + 1), true, clicks, o});
    if (seg.unit == RoundUnit::pulse && pos == seg.count) break;
  }
  if (q > 0.0) t.pulses = pos;

  // Heralded rounds among the skipped pulses (herald fired, no click).
  const std::uint64_t idle = t.pulses - n_events;
  const double r = q < 1.0 ? std::clamp(quiet / (1.0 - q), 0.0, 1.0) : 0.0;
  std::uint64_t dark = 0;
  if (idle > 0 && r > 0.0) {
    std::binomial_distribution<std::uint64_t> b(idle, r);
    dark = b(g);
  }
  t.heralded = n_events + dark;
  t.bits = std::move(bits).finish();
  return t;
}

Tally merge(Tally a, const Tally& b) {
  for (std::size_t c = 0; c < kContexts; ++c) {
    for (std::size_t k = 0; k < 3; ++k) a.single[c][k] += b.single[c][k];
    a.events[c] += b.events[c];
    a.multi[c] += b.multi[c];
  }
  a.records.reserve(a.records.size() + b.records.size());
  for (EventRecord r : b.records) {
    r.round_id += a.pulses;
    a.records.push_back(r);
  }
  a.pulses += b.pulses;
  a.heralded += b.heralded;
  BitWriter w;
  w.append(a.bits);
  w.append(b.bits);
  a.bits = std::move(w).finish();
  return a;
}

RunSummary summarize(Tally tally, const SimulationModel& model, const SourceParams& src,
                     const ChannelParams& ch, std::uint64_t seed) {
  RunSummary s;
  s.model = model;
  s.modes = model.modes;
  s.seed = seed;
  s.generator = std::string(rng::kGeneratorName);
  for (std::size_t c = 0; c < kContexts; ++c) {
    const auto& n = tally.single[c];
    if (n[0] + n[1] + n[2] > 0) s.joint_tables[c] = kcbs::efficiency_correct(n, ch.detector_eff, model.modes[c]);
  }
  s.duration_s = static_cast<double>(tally.pulses) / src.rep_rate;
  if (s.duration_s > 0.0) {
    std::uint64_t events = 0;
    for (auto e : tally.events) events += e;
    s.coincidence_rate = static_cast<double>(events) / s.duration_s;
    s.raw_bit_rate = static_cast<double>(tally.bits.size()) / s.duration_s;
  }
  BitStreamMeta meta;
  meta.origin = "simulate";
  tally.bits = tally.bits.with_meta(meta);
  s.tally = std::move(tally);
  return s;
}

RunSummary run_simulation(const mesh::StagePlan& plan, const SourceParams& src,
                          const ChannelParams& ch, const NoiseParams& noise,
                          const RunOptions& opt, std::uint64_t seed) {
  if (opt.rounds < 1) throw InvalidArgument("rounds must be at least 1");
  const SimulationModel model = build_model(plan, src, ch, noise, seed);
  const std::vector<Segment> segs = plan_segments(opt);
  std::vector<Tally> parts(segs.size());

  unsigned workers = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : opt.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(segs.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < segs.size();) {
      try {
        parts[i] = run_segment(model, segs[i], seed, opt.keep_events);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  Tally total;
  for (const Tally& p : parts) total = merge(std::move(total), p);
  return summarize(std::move(total), model, src, ch, seed);
}

double detected_rate(const RunSummary& summary, const SourceParams& src) {
  if (summary.tally.pulses == 0) throw InvalidArgument("detected_rate: no rounds were run");
  return static_cast<double>(summary.tally.bits.size()) /
         (static_cast<double>(summary.tally.pulses) / src.rep_rate);
}

BitStream raw_bit_map(const std::vector<EventRecord>& events, BitMapStats* stats) {
  BitMapStats st;
  BitWriter w;
  for (const auto& e : events) {
    const Outcome o = e.herald ? e.outcome : Outcome::no_click;
    switch (o) {
      case Outcome::bit0: w.push(false); ++st.kept; break;
      case Outcome::bit1: w.push(true); ++st.kept; break;
      case Outcome::aux: ++st.aux; break;
      case Outcome::no_click: ++st.no_click; break;
      case Outcome::multi: ++st.multi; break;
    }
  }
  if (stats) *stats = st;
  return std::move(w).finish();
}

}  // namespace cqrng::photonics
