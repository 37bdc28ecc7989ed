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


#include "cqrng/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "cqrng/error.hpp"
#include "cqrng/rng.hpp"

namespace cqrng::cli {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what, path);
}

void read(const json& j, double& out, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  out = j.get<double>();
  if (!std::isfinite(out)) bad(path, "expected a finite number");
}

void read(const json& j, std::uint64_t& out, const std::string& path) {
  if (j.is_number_unsigned()) {
    out = j.get<std::uint64_t>();
  } else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    out = static_cast<std::uint64_t>(j.get<std::int64_t>());
  } else {
    bad(path, "expected a non-negative integer");
  }
}

void read(const json& j, std::uint32_t& out, const std::string& path) {
  std::uint64_t v = 0;
  read(j, v, path);
  if (v > 0xffffffffULL) bad(path, "out of range");
  out = static_cast<std::uint32_t>(v);
}

void read(const json& j, int& out, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < -2147483647LL || v > 2147483647LL) bad(path, "out of range");
  out = static_cast<int>(v);
}

void read(const json& j, bool& out, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected true or false");
  out = j.get<bool>();
}

void read(const json& j, std::string& out, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  out = j.get<std::string>();
}

void read(const json& j, std::array<double, 3>& out, const std::string& path) {
  if (!j.is_array() || j.size() != 3) bad(path, "expected an array of 3 numbers");
  for (std::size_t i = 0; i < 3; ++i) read(j[i], out[i], path + "[" + std::to_string(i) + "]");
}

void read(const json& j, std::vector<double>& out, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  out.assign(j.size(), 0.0);
  for (std::size_t i = 0; i < j.size(); ++i) read(j[i], out[i], path + "[" + std::to_string(i) + "]");
}

template <class T>
void read(const json& j, std::optional<T>& out, const std::string& path) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, v, path);
  out = v;
}

// Object reader that remembers which keys were consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it != j_.end()) read(*it, out, join(path_, key));
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) {
        const std::string p = join(path_, it.key());
        throw ConfigError("config: unknown key '" + p + "'", p);
      }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json cells_to_json(const mesh::MeshConfig& cfg) {
  json arr = json::array();
  for (const auto& c : cfg.settings)
    arr.push_back({{"cell", c.cell},
                   {"phi1", c.setting.phi1},
                   {"phi2", c.setting.phi2},
                   {"modes", {c.modes.first, c.modes.second}},
                   {"layer", c.layer}});
  return arr;
}

mesh::MeshConfig cells_from_json(const json& j, const std::string& path, const std::string& label) {
  if (!j.is_array()) bad(path, "expected a list of cells");
  mesh::MeshConfig cfg;
  cfg.label = label;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Obj o(j[i], p);
    mesh::CellSetting c;
    o.get("cell", c.cell);
    o.get("phi1", c.setting.phi1);
    o.get("phi2", c.setting.phi2);
    o.get("layer", c.layer);
    if (const json* m = o.sub("modes")) {
      std::uint64_t a = 0, b = 0;
      if (!m->is_array() || m->size() != 2) bad(o.path("modes"), "expected [i, j]");
      read((*m)[0], a, o.path("modes"));
      read((*m)[1], b, o.path("modes"));
      c.modes = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    } else {
      bad(o.path("modes"), "missing");
    }
    o.finish();
    cfg.settings.push_back(c);
  }
  return cfg;
}

json plan_to_json(const PlanSpec& plan) {
  if (plan.use_default) return "default-kcbs";
  json contexts = json::array();
  json modes = json::array();
  for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
    contexts.push_back(cells_to_json(plan.custom.contexts[c]));
    const auto& m = plan.custom.modes[c];
    modes.push_back({m.first, m.second, m.aux});
  }
  return {{"prep", cells_to_json(plan.custom.prep)}, {"contexts", contexts}, {"modes", modes}};
}

PlanSpec plan_from_json(const json& j) {
  PlanSpec out;
  if (j.is_string()) {
    if (j.get<std::string>() != "default-kcbs") bad("plan", "unknown plan '" + j.get<std::string>() + "'");
    return out;
  }
  Obj o(j, "plan");
  out.use_default = false;
  auto& p = out.custom;
  const json* prep = o.sub("prep");
  const json* contexts = o.sub("contexts");
  const json* modes = o.sub("modes");
  if (!prep || !contexts) bad("plan", "custom plans need 'prep' and 'contexts'");
  p.prep = cells_from_json(*prep, "plan.prep", "prep");
  if (!contexts->is_array() || contexts->size() != kcbs::kContexts)
    bad("plan.contexts", "expected 5 cell lists");
  for (std::size_t c = 0; c < kcbs::kContexts; ++c)
    p.contexts[c] = cells_from_json((*contexts)[c], "plan.contexts[" + std::to_string(c) + "]",
                                    "context" + std::to_string(c + 1));
  if (modes) {
    if (!modes->is_array() || modes->size() != kcbs::kContexts) bad("plan.modes", "expected 5 triples");
    for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
      const std::string mp = "plan.modes[" + std::to_string(c) + "]";
      const json& m = (*modes)[c];
      if (!m.is_array() || m.size() != 3) bad(mp, "expected [first, second, aux]");
      std::uint64_t v[3];
      for (int k = 0; k < 3; ++k) read(m[k], v[k], mp);
      p.modes[c] = {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                    static_cast<std::size_t>(v[2])};
    }
  } else {
    p.modes = mesh::reference_mode_map();
  }
  for (const auto& cell : p.prep.settings) p.theta_values.push_back(mesh::canonical_angle(cell.setting.delta()));
  for (const auto& ctx : p.contexts)
    for (const auto& cell : ctx.settings) p.theta_values.push_back(mesh::canonical_angle(cell.setting.delta()));
  o.finish();
  return out;
}

const char* unit_name(photonics::RoundUnit u) { return u == photonics::RoundUnit::pulse ? "pulse" : "detected"; }
const char* schedule_name(photonics::Schedule s) {
  return s == photonics::Schedule::uniform ? "uniform" : "sequential";
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

bool operator==(const CertifierConfig& a, const CertifierConfig& b) {
  return a.chi_hat == b.chi_hat && a.delta == b.delta && a.R_lo == b.R_lo && a.R_hi == b.R_hi &&
         a.eps_com == b.eps_com && a.eta == b.eta && a.n_rounds == b.n_rounds &&
         a.eps_fin == b.eps_fin && a.round_rate == b.round_rate &&
         a.solver.bisect_tol == b.solver.bisect_tol && a.solver.max_sweeps == b.solver.max_sweeps &&
         a.solver.feas_tol == b.solver.feas_tol && a.attack.restarts == b.attack.restarts &&
         a.attack.rounds == b.attack.rounds && a.attack.ensemble_size == b.attack.ensemble_size &&
         a.attack.seed == b.attack.seed;
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  // Equal blocks of post-selected events per context.
  c.run.rounds = 100000;
  c.run.unit = photonics::RoundUnit::detected;
  c.run.schedule = photonics::Schedule::sequential;
  if (name == "reference") return c;
  if (name == "upgraded") {
    // 1.5 MHz heralded photons, low-loss mesh, better detectors.
    c.source = {1.5e6, 1.0, 1.0};
    c.channel.source_loss_db = 0.0;
    c.channel.mesh_loss_db = 0.6;
    c.channel.per_cell_loss_db = 0.5;
    c.channel.detector_eff = {0.95, 0.95, 0.95};
    c.run.rounds = 2000000;
    return c;
  }
  if (name == "ideal") {
    c.source = {1.25e9, 1.0, 1.0};
    c.channel.source_loss_db = c.channel.mesh_loss_db = c.channel.per_cell_loss_db = 0.0;
    c.channel.detector_eff = {1.0, 1.0, 1.0};
    c.channel.dark_prob = 0.0;
    c.noise.phase_sigma = 0.0;
    c.noise.vprime_misalign = 0.0;
    c.analysis.overlap = 1.0;
    c.certifier.R_lo = c.certifier.R_hi = 1.0;
    c.certifier.eps_com = 0.0;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'", "preset");
}

std::vector<std::string> preset_names() { return {"reference", "upgraded", "ideal"}; }

json to_json(const RunConfig& c) {
  json j;
  j["format_version"] = c.format_version;
  j["source"] = {{"rep_rate", c.source.rep_rate},
                 {"pair_prob", c.source.pair_prob},
                 {"herald_eff", c.source.herald_eff}};
  j["channel"] = {{"source_loss_db", c.channel.source_loss_db},
                  {"mesh_loss_db", c.channel.mesh_loss_db},
                  {"per_cell_loss_db", c.channel.per_cell_loss_db},
                  {"detector_eff", c.channel.detector_eff},
                  {"dark_prob", c.channel.dark_prob}};
  j["noise"] = {{"phase_sigma", c.noise.phase_sigma},
                {"static_phase_sigma", c.noise.static_phase_sigma},
                {"vprime_misalign", opt_json(c.noise.vprime_misalign)},
                {"multi_pair", c.noise.multi_pair}};
  j["plan"] = plan_to_json(c.plan);
  j["run"] = {{"rounds", c.run.rounds},
              {"unit", unit_name(c.run.unit)},
              {"schedule", schedule_name(c.run.schedule)},
              {"shards", c.run.shards},
              {"keep_events", c.run.keep_events}};
  j["analysis"] = {{"overlap", c.analysis.overlap}, {"overlap_sigma", c.analysis.overlap_sigma}};
  const auto& ce = c.certifier;
  j["certifier"] = {
      {"chi_hat", opt_json(ce.chi_hat)},
      {"delta", opt_json(ce.delta)},
      {"R_lo", ce.R_lo},
      {"R_hi", ce.R_hi},
      {"eps_com", ce.eps_com},
      {"eta", ce.eta ? json(*ce.eta) : json(nullptr)},
      {"n_rounds", ce.n_rounds ? json(*ce.n_rounds) : json(nullptr)},
      {"eps_fin", ce.eps_fin},
      {"round_rate", opt_json(ce.round_rate)},
      {"solver",
       {{"bisect_tol", ce.solver.bisect_tol},
        {"max_sweeps", ce.solver.max_sweeps},
        {"feas_tol", ce.solver.feas_tol}}},
      {"attack",
       {{"restarts", ce.attack.restarts},
        {"rounds", ce.attack.rounds},
        {"ensemble_size", ce.attack.ensemble_size},
        {"seed", ce.attack.seed}}}};
  j["extractor"] = {{"eps_sec", c.extractor.eps_sec},
                    {"block_bits", c.extractor.block_bits},
                    {"seed_file", c.extractor.seed_file ? json(*c.extractor.seed_file) : json(nullptr)},
                    {"os_seed", c.extractor.os_seed}};
  j["tomography"] = {{"shots_per_basis", c.tomography.shots_per_basis},
                     {"bootstrap", c.tomography.bootstrap},
                     {"max_iterations", c.tomography.max_iterations},
                     {"tolerance", c.tomography.tolerance},
                     {"eta", c.tomography.eta ? json(*c.tomography.eta) : json(nullptr)}};
  j["curve"] = {{"points", c.curve.points},
                {"grid", c.curve.grid ? json(*c.curve.grid) : json(nullptr)},
                {"round_rate", opt_json(c.curve.round_rate)}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Obj root(doc, "");
  root.get("format_version", c.format_version);
  if (c.format_version != kFormatVersion)
    bad("format_version", "unsupported version " + std::to_string(c.format_version));
  if (const json* s = root.sub("source")) {
    Obj o(*s, "source");
    o.get("rep_rate", c.source.rep_rate);
    o.get("pair_prob", c.source.pair_prob);
    o.get("herald_eff", c.source.herald_eff);
    o.finish();
  }
  if (const json* s = root.sub("channel")) {
    Obj o(*s, "channel");
    o.get("source_loss_db", c.channel.source_loss_db);
    o.get("mesh_loss_db", c.channel.mesh_loss_db);
    o.get("per_cell_loss_db", c.channel.per_cell_loss_db);
    o.get("detector_eff", c.channel.detector_eff);
    o.get("dark_prob", c.channel.dark_prob);
    o.finish();
  }
  if (const json* s = root.sub("noise")) {
    Obj o(*s, "noise");
    o.get("phase_sigma", c.noise.phase_sigma);
    o.get("static_phase_sigma", c.noise.static_phase_sigma);
    o.get("vprime_misalign", c.noise.vprime_misalign);
    o.get("multi_pair", c.noise.multi_pair);
    o.finish();
  }
  if (const json* s = root.sub("plan")) c.plan = plan_from_json(*s);
  if (const json* s = root.sub("run")) {
    Obj o(*s, "run");
    o.get("rounds", c.run.rounds);
    std::string unit = unit_name(c.run.unit), sched = schedule_name(c.run.schedule);
    o.get("unit", unit);
    o.get("schedule", sched);
    if (unit == "pulse") c.run.unit = photonics::RoundUnit::pulse;
    else if (unit == "detected") c.run.unit = photonics::RoundUnit::detected;
    else bad("run.unit", "expected 'pulse' or 'detected'");
    if (sched == "uniform") c.run.schedule = photonics::Schedule::uniform;
    else if (sched == "sequential") c.run.schedule = photonics::Schedule::sequential;
    else bad("run.schedule", "expected 'uniform' or 'sequential'");
    o.get("shards", c.run.shards);
    o.get("keep_events", c.run.keep_events);
    o.finish();
  }
  if (const json* s = root.sub("analysis")) {
    Obj o(*s, "analysis");
    o.get("overlap", c.analysis.overlap);
    o.get("overlap_sigma", c.analysis.overlap_sigma);
    o.finish();
  }
  if (const json* s = root.sub("certifier")) {
    Obj o(*s, "certifier");
    auto& ce = c.certifier;
    o.get("chi_hat", ce.chi_hat);
    o.get("delta", ce.delta);
    o.get("R_lo", ce.R_lo);
    o.get("R_hi", ce.R_hi);
    o.get("eps_com", ce.eps_com);
    o.get("eta", ce.eta);
    o.get("n_rounds", ce.n_rounds);
    o.get("eps_fin", ce.eps_fin);
    o.get("round_rate", ce.round_rate);
    if (const json* t = o.sub("solver")) {
      Obj so(*t, "certifier.solver");
      so.get("bisect_tol", ce.solver.bisect_tol);
      so.get("max_sweeps", ce.solver.max_sweeps);
      so.get("feas_tol", ce.solver.feas_tol);
      so.finish();
    }
    if (const json* t = o.sub("attack")) {
      Obj ao(*t, "certifier.attack");
      ao.get("restarts", ce.attack.restarts);
      ao.get("rounds", ce.attack.rounds);
      std::uint64_t size = ce.attack.ensemble_size;
      ao.get("ensemble_size", size);
      ce.attack.ensemble_size = static_cast<std::size_t>(size);
      ao.get("seed", ce.attack.seed);
      ao.finish();
    }
    o.finish();
  }
  if (const json* s = root.sub("extractor")) {
    Obj o(*s, "extractor");
    o.get("eps_sec", c.extractor.eps_sec);
    o.get("block_bits", c.extractor.block_bits);
    o.get("seed_file", c.extractor.seed_file);
    o.get("os_seed", c.extractor.os_seed);
    o.finish();
  }
  if (const json* s = root.sub("tomography")) {
    Obj o(*s, "tomography");
    o.get("shots_per_basis", c.tomography.shots_per_basis);
    o.get("bootstrap", c.tomography.bootstrap);
    o.get("max_iterations", c.tomography.max_iterations);
    o.get("tolerance", c.tomography.tolerance);
    o.get("eta", c.tomography.eta);
    o.finish();
  }
  if (const json* s = root.sub("curve")) {
    Obj o(*s, "curve");
    std::uint64_t points = c.curve.points;
    o.get("points", points);
    c.curve.points = static_cast<std::size_t>(points);
    o.get("grid", c.curve.grid);
    o.get("round_rate", c.curve.round_rate);
    o.finish();
  }
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);
  root.finish();
  validate(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

void validate(const RunConfig& c) {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  auto need = [](bool ok, const char* key, const char* what) {
    if (!ok) bad(key, what);
  };
  need(c.source.rep_rate > 0.0, "source.rep_rate", "must be positive");
  need(prob(c.source.pair_prob), "source.pair_prob", "must lie in [0, 1]");
  need(prob(c.source.herald_eff), "source.herald_eff", "must lie in [0, 1]");
  need(c.channel.source_loss_db >= 0.0, "channel.source_loss_db", "must be non-negative");
  need(c.channel.mesh_loss_db >= 0.0, "channel.mesh_loss_db", "must be non-negative");
  need(c.channel.per_cell_loss_db >= 0.0, "channel.per_cell_loss_db", "must be non-negative");
  for (double e : c.channel.detector_eff) need(prob(e), "channel.detector_eff", "must lie in [0, 1]");
  need(prob(c.channel.dark_prob), "channel.dark_prob", "must lie in [0, 1]");
  need(c.noise.phase_sigma >= 0.0, "noise.phase_sigma", "must be non-negative");
  need(c.noise.static_phase_sigma >= 0.0, "noise.static_phase_sigma", "must be non-negative");
  need(c.run.rounds > 0, "run.rounds", "must be positive");
  need(c.run.shards > 0, "run.shards", "must be positive");
  need(c.analysis.overlap >= -1.0 && c.analysis.overlap <= 1.0, "analysis.overlap",
       "must lie in [-1, 1]");
  need(c.analysis.overlap_sigma >= 0.0, "analysis.overlap_sigma", "must be non-negative");
  need(c.certifier.solver.bisect_tol > 0.0, "certifier.solver.bisect_tol", "must be positive");
  need(c.certifier.solver.max_sweeps > 0, "certifier.solver.max_sweeps", "must be positive");
  need(c.certifier.solver.feas_tol > 0.0, "certifier.solver.feas_tol", "must be positive");
  need(c.certifier.attack.restarts >= 0, "certifier.attack.restarts", "must be non-negative");
  need(c.certifier.attack.rounds >= 0, "certifier.attack.rounds", "must be non-negative");
  need(c.certifier.attack.ensemble_size > 0, "certifier.attack.ensemble_size", "must be positive");
  if (c.certifier.round_rate) need(*c.certifier.round_rate >= 0.0, "certifier.round_rate", "must be non-negative");
  if (c.certifier.n_rounds) need(*c.certifier.n_rounds > 0, "certifier.n_rounds", "must be positive");
  try {
    certifier::validate(certification_problem(c));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: certifier: ") + e.what(), "certifier");
  }
  need(c.extractor.eps_sec > 0.0 && c.extractor.eps_sec < 1.0, "extractor.eps_sec", "must lie in (0, 1)");
  need(c.extractor.block_bits > 0, "extractor.block_bits", "must be positive");
  need(c.tomography.shots_per_basis > 0, "tomography.shots_per_basis", "must be positive");
  need(c.tomography.bootstrap == 0 || c.tomography.bootstrap >= 100, "tomography.bootstrap",
       "must be 0 or at least 100");
  need(c.tomography.max_iterations > 0, "tomography.max_iterations", "must be positive");
  need(c.tomography.tolerance > 0.0, "tomography.tolerance", "must be positive");
  if (c.tomography.eta)
    for (double e : *c.tomography.eta) need(e > 0.0 && e <= 1.0, "tomography.eta", "must lie in (0, 1]");
  need(c.curve.points >= 2, "curve.points", "need at least two points");
  if (c.curve.grid) need(!c.curve.grid->empty(), "curve.grid", "must not be empty");
  if (c.curve.round_rate) need(*c.curve.round_rate >= 0.0, "curve.round_rate", "must be non-negative");
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::fnv1a(j.dump())));
  return buf;
}

mesh::StagePlan resolve_plan(const RunConfig& cfg) {
  return cfg.plan.use_default ? photonics::default_plan(cfg.noise) : cfg.plan.custom;
}

certifier::CertificationProblem certification_problem(const RunConfig& cfg) {
  certifier::CertificationProblem p;
  const auto& ce = cfg.certifier;
  if (ce.chi_hat) p.chi_hat = *ce.chi_hat;
  p.delta = ce.delta;
  p.R_lo = ce.R_lo;
  p.R_hi = ce.R_hi;
  p.eps_com = ce.eps_com;
  p.eta = ce.eta ? *ce.eta : cfg.channel.detector_eff;
  if (ce.n_rounds) p.n_rounds = *ce.n_rounds;
  p.eps_fin = ce.eps_fin;
  return p;
}

}  // namespace cqrng::cli
