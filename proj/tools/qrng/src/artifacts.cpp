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


#include "cqrng/cli/artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "cqrng/error.hpp"

namespace cqrng::cli {
namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw InvalidArgument("malformed artifact: " + what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing '") + key + "'");
  return *it;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    malformed(std::string("'") + key + "': " + e.what());
  }
}

json prov_json(const Provenance& p) {
  return {{"format_version", p.format_version}, {"config_hash", p.config_hash}, {"seed", p.seed}};
}

Provenance prov_from(const json& j) {
  const json& p = field(j, "provenance");
  Provenance out;
  out.format_version = get<int>(p, "format_version");
  if (out.format_version != kFormatVersion)
    malformed("unsupported format_version " + std::to_string(out.format_version));
  out.config_hash = get<std::string>(p, "config_hash");
  out.seed = get<std::uint64_t>(p, "seed");
  return out;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed("bad integer '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed("bad integer '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  malformed("bad boolean '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed("bad hex '" + s + "'");
  return v;
}

std::string quote(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) malformed("unterminated quote in CSV");
  return out;
}

CsvDoc make_csv(const Provenance& p, std::vector<std::string> header) {
  CsvDoc d;
  d.provenance = p;
  d.header = std::move(header);
  return d;
}

json matrix_json(const Real3x3& m) { return m; }
Real3x3 matrix_from(const json& j, const char* key) { return get<Real3x3>(j, key); }

json row_json(const kcbs::JointRow& r) {
  return {{"p_minus_plus", r.p_minus_plus},         {"p_plus_plus", r.p_plus_plus},
          {"p_plus_minus", r.p_plus_minus},         {"p_minus_minus", r.p_minus_minus},
          {"sigma_minus_plus", r.sigma_minus_plus}, {"sigma_plus_plus", r.sigma_plus_plus},
          {"sigma_plus_minus", r.sigma_plus_minus}, {"sigma_minus_minus", r.sigma_minus_minus},
          {"term_sigma", r.term_sigma}};
}

kcbs::JointRow row_from(const json& j) {
  kcbs::JointRow r;
  r.p_minus_plus = get<double>(j, "p_minus_plus");
  r.p_plus_plus = get<double>(j, "p_plus_plus");
  r.p_plus_minus = get<double>(j, "p_plus_minus");
  r.p_minus_minus = get<double>(j, "p_minus_minus");
  r.sigma_minus_plus = get<double>(j, "sigma_minus_plus");
  r.sigma_plus_plus = get<double>(j, "sigma_plus_plus");
  r.sigma_plus_minus = get<double>(j, "sigma_plus_minus");
  r.sigma_minus_minus = get<double>(j, "sigma_minus_minus");
  r.term_sigma = get<double>(j, "term_sigma");
  return r;
}

const std::vector<std::string> kJointHeader{
    "context",          "p_minus_plus",    "p_plus_plus",      "p_plus_minus",
    "p_minus_minus",    "sigma_minus_plus", "sigma_plus_plus", "sigma_plus_minus",
    "sigma_minus_minus", "term_sigma"};

const std::vector<std::string> kCountHeader{"context", "first_mode", "second_mode", "aux_mode",
                                            "n0",      "n1",         "n2",          "events",
                                            "multi"};

const std::vector<std::string> kCurveHeader{"chi", "h_min", "rate", "p_guess_upper", "ok", "error"};

json point_json(const certifier::CurvePoint& p) {
  return {{"chi", p.chi},     {"h_min", p.h_min}, {"rate", p.rate},
          {"p_guess_upper", p.p_guess_upper}, {"ok", p.ok}, {"error", p.error}};
}

certifier::CurvePoint point_from(const json& j) {
  certifier::CurvePoint p;
  p.chi = get<double>(j, "chi");
  p.h_min = get<double>(j, "h_min");
  p.rate = get<double>(j, "rate");
  p.p_guess_upper = get<double>(j, "p_guess_upper");
  p.ok = get<bool>(j, "ok");
  p.error = get<std::string>(j, "error");
  return p;
}

}  // namespace

Provenance provenance_of(const RunConfig& cfg) {
  return {kFormatVersion, config_hash(cfg), cfg.seed};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed("bad number '" + std::string(s) + "'");
  return v;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- CSV -------------------------------------------------------------------

const std::string* CsvDoc::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

std::size_t CsvDoc::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  malformed("CSV column '" + name + "' missing");
}

std::string emit_csv(const CsvDoc& d) {
  std::string out;
  out += "# format_version=" + std::to_string(d.provenance.format_version) + "\n";
  out += "# config_hash=" + d.provenance.config_hash + "\n";
  out += "# seed=" + std::to_string(d.provenance.seed) + "\n";
  for (const auto& [k, v] : d.meta) out += "# " + k + "=" + v + "\n";
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += quote(fields[i]);
    }
    out += '\n';
  };
  line(d.header);
  for (const auto& r : d.rows) line(r);
  return out;
}

CsvDoc parse_csv(const std::string& text) {
  CsvDoc d;
  bool have_version = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // free-form comment
      const std::string key = body.substr(0, eq), value = body.substr(eq + 1);
      if (key == "format_version") {
        d.provenance.format_version = parse_int(value);
        have_version = true;
      } else if (key == "config_hash") {
        d.provenance.config_hash = value;
      } else if (key == "seed") {
        d.provenance.seed = parse_u64(value);
      } else {
        d.meta.emplace_back(key, value);
      }
      continue;
    }
    auto fields = split_csv_line(line);
    if (d.header.empty()) {
      d.header = std::move(fields);
    } else {
      if (fields.size() != d.header.size())
        malformed("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                  std::to_string(d.header.size()));
      d.rows.push_back(std::move(fields));
    }
  }
  if (have_version && d.provenance.format_version != kFormatVersion)
    malformed("unsupported format_version " + std::to_string(d.provenance.format_version));
  if (d.header.empty()) malformed("CSV without a header");
  return d;
}

// ---- simulate ----------------------------------------------------------------

SimulationSummary make_summary(const photonics::RunSummary& run, const Provenance& prov) {
  SimulationSummary s;
  s.provenance = prov;
  s.generator = run.generator;
  s.pulses = run.tally.pulses;
  s.heralded = run.tally.heralded;
  s.events = run.tally.events;
  s.multi = run.tally.multi;
  s.duration_s = run.duration_s;
  s.coincidence_rate = run.coincidence_rate;
  s.raw_bit_rate = run.raw_bit_rate;
  s.raw_bits = run.tally.bits.size();
  s.raw_ones = run.tally.bits.count_ones();
  s.R = run.model.R;
  s.herald_prob = run.model.herald_prob;
  s.event_prob = run.model.event_prob;
  s.transmission = run.model.transmission;
  return s;
}

json to_json(const SimulationSummary& s) {
  return {{"provenance", prov_json(s.provenance)},
          {"generator", s.generator},
          {"pulses", s.pulses},
          {"heralded", s.heralded},
          {"events", s.events},
          {"multi", s.multi},
          {"duration_s", s.duration_s},
          {"coincidence_rate", s.coincidence_rate},
          {"raw_bit_rate", s.raw_bit_rate},
          {"raw_bits", s.raw_bits},
          {"raw_ones", s.raw_ones},
          {"R", s.R},
          {"herald_prob", s.herald_prob},
          {"event_prob", s.event_prob},
          {"transmission", s.transmission}};
}

SimulationSummary summary_from_json(const json& j) {
  SimulationSummary s;
  s.provenance = prov_from(j);
  s.generator = get<std::string>(j, "generator");
  s.pulses = get<std::uint64_t>(j, "pulses");
  s.heralded = get<std::uint64_t>(j, "heralded");
  s.events = get<std::array<std::uint64_t, kcbs::kContexts>>(j, "events");
  s.multi = get<std::array<std::uint64_t, kcbs::kContexts>>(j, "multi");
  s.duration_s = get<double>(j, "duration_s");
  s.coincidence_rate = get<double>(j, "coincidence_rate");
  s.raw_bit_rate = get<double>(j, "raw_bit_rate");
  s.raw_bits = get<std::uint64_t>(j, "raw_bits");
  s.raw_ones = get<std::uint64_t>(j, "raw_ones");
  s.R = get<double>(j, "R");
  s.herald_prob = get<double>(j, "herald_prob");
  s.event_prob = get<std::array<double, kcbs::kContexts>>(j, "event_prob");
  s.transmission = get<std::array<double, kcbs::kContexts>>(j, "transmission");
  return s;
}

CountTable make_counts(const photonics::RunSummary& run, const Provenance& prov) {
  CountTable t;
  t.provenance = prov;
  for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
    auto& r = t.rows[c];
    r.context = static_cast<int>(c + 1);
    r.modes = run.modes[c];
    r.single = run.tally.single[c];
    r.events = run.tally.events[c];
    r.multi = run.tally.multi[c];
  }
  return t;
}

std::string emit_counts(const CountTable& t) {
  CsvDoc d = make_csv(t.provenance, kCountHeader);
  for (const auto& r : t.rows)
    d.rows.push_back({std::to_string(r.context), std::to_string(r.modes.first),
                      std::to_string(r.modes.second), std::to_string(r.modes.aux),
                      std::to_string(r.single[0]), std::to_string(r.single[1]),
                      std::to_string(r.single[2]), std::to_string(r.events),
                      std::to_string(r.multi)});
  return emit_csv(d);
}

CountTable counts_from_csv(const CsvDoc& d) {
  CountTable t;
  t.provenance = d.provenance;
  if (d.rows.size() != kcbs::kContexts) malformed("counts table needs 5 rows");
  std::array<bool, kcbs::kContexts> seen{};
  const auto col = [&](const char* name) { return d.column(name); };
  for (const auto& f : d.rows) {
    CountRow r;
    r.context = parse_int(f[col("context")]);
    if (r.context < 1 || r.context > 5 || seen[r.context - 1]) malformed("bad or repeated context");
    seen[r.context - 1] = true;
    r.modes = {parse_u64(f[col("first_mode")]), parse_u64(f[col("second_mode")]),
               parse_u64(f[col("aux_mode")])};
    r.single = {parse_u64(f[col("n0")]), parse_u64(f[col("n1")]), parse_u64(f[col("n2")])};
    r.events = parse_u64(f[col("events")]);
    r.multi = parse_u64(f[col("multi")]);
    t.rows[r.context - 1] = r;
  }
  return t;
}

kcbs::JointProbTable joint_from_counts(const CountTable& t, const std::array<double, 3>& eta) {
  kcbs::JointProbTable out{};
  for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
    const auto& r = t.rows[c];
    if (r.single[0] + r.single[1] + r.single[2] == 0)
      throw UndersizedDataError("context " + std::to_string(c + 1) + " has no counts");
    out[c] = kcbs::efficiency_correct(r.single, eta, r.modes);
  }
  return out;
}

std::string emit_events(const EventLog& log) {
  std::string out;
  json head = {{"provenance", prov_json(log.provenance)},
               {"rep_rate", log.rep_rate},
               {"events", log.events.size()}};
  out += head.dump() + "\n";
  for (const auto& e : log.events) {
    json j = {{"round_id", e.round_id},
              {"context", e.context},
              {"herald", e.herald},
              {"clicks", e.clicks},
              {"outcome", photonics::to_string(e.outcome)}};
    out += j.dump() + "\n";
  }
  return out;
}

EventLog parse_events(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::uint64_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      malformed(std::string("event log line: ") + e.what());
    }
    if (first) {
      log.provenance = prov_from(j);
      log.rep_rate = get<double>(j, "rep_rate");
      expected = get<std::uint64_t>(j, "events");
      first = false;
      continue;
    }
    photonics::EventRecord e;
    e.round_id = get<std::uint64_t>(j, "round_id");
    e.context = get<int>(j, "context");
    e.herald = get<bool>(j, "herald");
    e.clicks = get<std::uint8_t>(j, "clicks");
    try {
      e.outcome = photonics::outcome_from_string(get<std::string>(j, "outcome"));
    } catch (const Error& err) {
      malformed(err.what());
    }
    log.events.push_back(e);
  }
  if (first) malformed("empty event log");
  if (log.events.size() != expected) malformed("event log is truncated");
  return log;
}

// ---- analyze -----------------------------------------------------------------

std::string emit_joint(const JointTableDoc& t) {
  CsvDoc d = make_csv(t.provenance, kJointHeader);
  for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
    const auto& r = t.table[c];
    d.rows.push_back({std::to_string(c + 1), format_double(r.p_minus_plus),
                      format_double(r.p_plus_plus), format_double(r.p_plus_minus),
                      format_double(r.p_minus_minus), format_double(r.sigma_minus_plus),
                      format_double(r.sigma_plus_plus), format_double(r.sigma_plus_minus),
                      format_double(r.sigma_minus_minus), format_double(r.term_sigma)});
  }
  return emit_csv(d);
}

JointTableDoc joint_from_csv(const CsvDoc& d) {
  JointTableDoc t;
  t.provenance = d.provenance;
  if (d.rows.size() != kcbs::kContexts) malformed("joint table needs 5 rows");
  std::array<bool, kcbs::kContexts> seen{};
  // Sigma columns are optional so hand-written tables stay short.
  auto opt = [&](const std::vector<std::string>& f, const char* name) {
    for (std::size_t i = 0; i < d.header.size(); ++i)
      if (d.header[i] == name) return parse_double(f[i]);
    return 0.0;
  };
  for (const auto& f : d.rows) {
    const int c = parse_int(f[d.column("context")]);
    if (c < 1 || c > 5 || seen[c - 1]) malformed("bad or repeated context");
    seen[c - 1] = true;
    auto& r = t.table[c - 1];
    r.p_minus_plus = parse_double(f[d.column("p_minus_plus")]);
    r.p_plus_plus = parse_double(f[d.column("p_plus_plus")]);
    r.p_plus_minus = parse_double(f[d.column("p_plus_minus")]);
    r.p_minus_minus = opt(f, "p_minus_minus");
    r.sigma_minus_plus = opt(f, "sigma_minus_plus");
    r.sigma_plus_plus = opt(f, "sigma_plus_plus");
    r.sigma_plus_minus = opt(f, "sigma_plus_minus");
    r.sigma_minus_minus = opt(f, "sigma_minus_minus");
    r.term_sigma = opt(f, "term_sigma");
  }
  return t;
}

json to_json(const JointTableDoc& t) {
  json rows = json::array();
  for (const auto& r : t.table) rows.push_back(row_json(r));
  return {{"provenance", prov_json(t.provenance)}, {"rows", rows}};
}

JointTableDoc joint_from_json(const json& j) {
  JointTableDoc t;
  t.provenance = prov_from(j);
  const json& rows = field(j, "rows");
  if (!rows.is_array() || rows.size() != kcbs::kContexts) malformed("joint table needs 5 rows");
  for (std::size_t c = 0; c < kcbs::kContexts; ++c) t.table[c] = row_from(rows[c]);
  return t;
}

json to_json(const KcbsDoc& d) {
  const auto& r = d.result;
  return {{"provenance", prov_json(d.provenance)},
          {"chi", r.chi},
          {"chi_mod", r.chi_mod},
          {"terms", r.terms},
          {"term_sigmas", r.term_sigmas},
          {"R", r.R},
          {"R_sigma", r.R_sigma},
          {"sigma", r.sigma}};
}

KcbsDoc kcbs_from_json(const json& j) {
  KcbsDoc d;
  d.provenance = prov_from(j);
  auto& r = d.result;
  r.chi = get<double>(j, "chi");
  r.chi_mod = get<double>(j, "chi_mod");
  r.terms = get<std::array<double, kcbs::kContexts>>(j, "terms");
  r.term_sigmas = get<std::array<double, kcbs::kContexts>>(j, "term_sigmas");
  r.R = get<double>(j, "R");
  r.R_sigma = get<double>(j, "R_sigma");
  r.sigma = get<double>(j, "sigma");
  return d;
}

// ---- certify -----------------------------------------------------------------

json to_json(const CertificationDoc& d) {
  const auto& p = d.problem;
  const auto& r = d.result;
  const auto& g = r.diagnostics;
  return {{"provenance", prov_json(d.provenance)},
          {"problem",
           {{"chi_hat", p.chi_hat},
            {"delta", p.delta ? json(*p.delta) : json(nullptr)},
            {"R_lo", p.R_lo},
            {"R_hi", p.R_hi},
            {"eps_com", p.eps_com},
            {"eta", p.eta},
            {"n_rounds", p.n_rounds},
            {"eps_fin", p.eps_fin}}},
          {"result",
           {{"chi_worst", r.chi_worst},
            {"delta", r.delta},
            {"p_guess_upper", r.p_guess_upper},
            {"p_guess_attack", r.p_guess_attack},
            {"attack_feasible", r.attack_feasible},
            {"h_min", r.h_min},
            {"round_rate", r.round_rate},
            {"rate", r.rate},
            {"diagnostics",
             {{"bisection_steps", g.bisection_steps},
              {"sweeps", g.sweeps},
              {"width", g.width},
              {"min_eigenvalue", g.min_eigenvalue},
              {"affine_residual", g.affine_residual},
              {"weight", g.weight},
              {"stagnated", g.stagnated}}}}}};
}

CertificationDoc certification_from_json(const json& j) {
  CertificationDoc d;
  d.provenance = prov_from(j);
  const json& p = field(j, "problem");
  d.problem.chi_hat = get<double>(p, "chi_hat");
  if (!field(p, "delta").is_null()) d.problem.delta = get<double>(p, "delta");
  d.problem.R_lo = get<double>(p, "R_lo");
  d.problem.R_hi = get<double>(p, "R_hi");
  d.problem.eps_com = get<double>(p, "eps_com");
  d.problem.eta = get<std::array<double, 3>>(p, "eta");
  d.problem.n_rounds = get<std::uint64_t>(p, "n_rounds");
  d.problem.eps_fin = get<double>(p, "eps_fin");
  const json& r = field(j, "result");
  auto& o = d.result;
  o.chi_worst = get<double>(r, "chi_worst");
  o.delta = get<double>(r, "delta");
  o.p_guess_upper = get<double>(r, "p_guess_upper");
  o.p_guess_attack = get<double>(r, "p_guess_attack");
  o.attack_feasible = get<bool>(r, "attack_feasible");
  o.h_min = get<double>(r, "h_min");
  o.round_rate = get<double>(r, "round_rate");
  o.rate = get<double>(r, "rate");
  const json& g = field(r, "diagnostics");
  o.diagnostics.bisection_steps = get<int>(g, "bisection_steps");
  o.diagnostics.sweeps = get<long long>(g, "sweeps");
  o.diagnostics.width = get<double>(g, "width");
  o.diagnostics.min_eigenvalue = get<double>(g, "min_eigenvalue");
  o.diagnostics.affine_residual = get<double>(g, "affine_residual");
  o.diagnostics.weight = get<double>(g, "weight");
  o.diagnostics.stagnated = get<bool>(g, "stagnated");
  return d;
}

// ---- extract -----------------------------------------------------------------

json to_json(const ExtractionDoc& d) {
  return {{"provenance", prov_json(d.provenance)},
          {"seed_source", d.seed_source},
          {"seed_fingerprint", hex64(d.seed_fingerprint)},
          {"input_bits", d.input_bits},
          {"output_bits", d.output_bits},
          {"h_min", d.h_min},
          {"eps_sec", d.eps_sec},
          {"block_bits", d.block_bits},
          {"output_per_block", d.output_per_block},
          {"blocks", d.blocks},
          {"dropped_bits", d.dropped_bits}};
}

ExtractionDoc extraction_from_json(const json& j) {
  ExtractionDoc d;
  d.provenance = prov_from(j);
  d.seed_source = get<std::string>(j, "seed_source");
  d.seed_fingerprint = from_hex64(get<std::string>(j, "seed_fingerprint"));
  d.input_bits = get<std::uint64_t>(j, "input_bits");
  d.output_bits = get<std::uint64_t>(j, "output_bits");
  d.h_min = get<double>(j, "h_min");
  d.eps_sec = get<double>(j, "eps_sec");
  d.block_bits = get<std::uint64_t>(j, "block_bits");
  d.output_per_block = get<std::uint64_t>(j, "output_per_block");
  d.blocks = get<std::uint64_t>(j, "blocks");
  d.dropped_bits = get<std::uint64_t>(j, "dropped_bits");
  return d;
}

// ---- battery -----------------------------------------------------------------

json to_json(const BatteryDoc& d) {
  json tests = json::array();
  for (const auto& t : d.report.tests)
    tests.push_back(
        {{"name", t.name}, {"statistic", t.statistic}, {"p_value", t.p_value}, {"pass", t.pass}});
  return {{"provenance", prov_json(d.provenance)},
          {"input", d.input},
          {"alpha", d.alpha},
          {"bits", d.report.bits},
          {"passed", d.report.passed},
          {"all_passed", d.report.all_passed()},
          {"tests", tests}};
}

BatteryDoc battery_from_json(const json& j) {
  BatteryDoc d;
  d.provenance = prov_from(j);
  d.input = get<std::string>(j, "input");
  d.alpha = get<double>(j, "alpha");
  d.report.bits = get<std::uint64_t>(j, "bits");
  d.report.passed = get<std::size_t>(j, "passed");
  const json& tests = field(j, "tests");
  if (!tests.is_array()) malformed("'tests' must be an array");
  for (const auto& t : tests)
    d.report.tests.push_back({get<std::string>(t, "name"), get<double>(t, "statistic"),
                              get<double>(t, "p_value"), get<bool>(t, "pass")});
  return d;
}

std::string battery_table(const battery::BatteryReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %14s %12s  %s\n", "test", "statistic", "p-value", "result");
  out += buf;
  for (const auto& t : r.tests) {
    std::snprintf(buf, sizeof buf, "%-18s %14.6g %12.6f  %s\n", t.name.c_str(), t.statistic,
                  t.p_value, t.pass ? "PASS" : "FAIL");
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%zu/%zu passed on %llu bits\n", r.passed, r.tests.size(),
                static_cast<unsigned long long>(r.bits));
  out += buf;
  return out;
}

// ---- tomo --------------------------------------------------------------------

json to_json(const tomography::TomographyData& d) {
  return {{"counts", d.counts}, {"eta", d.eta}};
}

tomography::TomographyData tomography_data_from_json(const json& j) {
  tomography::TomographyData d;
  d.counts = get<std::array<std::array<std::uint64_t, 3>, 3>>(j, "counts");
  d.eta = get<std::array<double, 3>>(j, "eta");
  return d;
}

json to_json(const TomographyDoc& d) {
  return {{"provenance", prov_json(d.provenance)},
          {"source", d.source},
          {"data", to_json(d.data)},
          {"rho_re", matrix_json(d.rho_re)},
          {"rho_im", matrix_json(d.rho_im)},
          {"log_likelihood", d.log_likelihood},
          {"iterations", d.iterations},
          {"converged", d.converged},
          {"fidelity", d.fidelity},
          {"bootstrap",
           {{"resamples", d.resamples},
            {"fidelity_mean", d.fidelity_mean},
            {"fidelity_std", d.fidelity_std},
            {"rho_std_re", matrix_json(d.rho_std_re)},
            {"rho_std_im", matrix_json(d.rho_std_im)}}}};
}

TomographyDoc tomography_from_json(const json& j) {
  TomographyDoc d;
  d.provenance = prov_from(j);
  d.source = get<std::string>(j, "source");
  d.data = tomography_data_from_json(field(j, "data"));
  d.rho_re = matrix_from(j, "rho_re");
  d.rho_im = matrix_from(j, "rho_im");
  d.log_likelihood = get<double>(j, "log_likelihood");
  d.iterations = get<int>(j, "iterations");
  d.converged = get<bool>(j, "converged");
  d.fidelity = get<double>(j, "fidelity");
  const json& b = field(j, "bootstrap");
  d.resamples = get<int>(b, "resamples");
  d.fidelity_mean = get<double>(b, "fidelity_mean");
  d.fidelity_std = get<double>(b, "fidelity_std");
  d.rho_std_re = matrix_from(b, "rho_std_re");
  d.rho_std_im = matrix_from(b, "rho_std_im");
  return d;
}

// ---- curve -------------------------------------------------------------------

std::string emit_curve(const CurveDoc& c) {
  CsvDoc d = make_csv(c.provenance, kCurveHeader);
  d.meta = {{"round_rate", format_double(c.round_rate)}, {"monotone", c.monotone ? "true" : "false"}};
  for (const auto& p : c.points)
    d.rows.push_back({format_double(p.chi), format_double(p.h_min), format_double(p.rate),
                      format_double(p.p_guess_upper), p.ok ? "true" : "false", p.error});
  return emit_csv(d);
}

CurveDoc curve_from_csv(const CsvDoc& d) {
  CurveDoc c;
  c.provenance = d.provenance;
  if (const auto* v = d.find_meta("round_rate")) c.round_rate = parse_double(*v);
  if (const auto* v = d.find_meta("monotone")) c.monotone = parse_bool(*v);
  for (const auto& f : d.rows) {
    certifier::CurvePoint p;
    p.chi = parse_double(f[d.column("chi")]);
    p.h_min = parse_double(f[d.column("h_min")]);
    p.rate = parse_double(f[d.column("rate")]);
    p.p_guess_upper = parse_double(f[d.column("p_guess_upper")]);
    p.ok = parse_bool(f[d.column("ok")]);
    p.error = f[d.column("error")];
    c.points.push_back(p);
  }
  return c;
}

json to_json(const CurveDoc& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point_json(p));
  return {{"provenance", prov_json(c.provenance)},
          {"round_rate", c.round_rate},
          {"monotone", c.monotone},
          {"points", pts}};
}

CurveDoc curve_from_json(const json& j) {
  CurveDoc c;
  c.provenance = prov_from(j);
  c.round_rate = get<double>(j, "round_rate");
  c.monotone = get<bool>(j, "monotone");
  const json& pts = field(j, "points");
  if (!pts.is_array()) malformed("'points' must be an array");
  for (const auto& p : pts) c.points.push_back(point_from(p));
  return c;
}

// ---- report ------------------------------------------------------------------

json to_json(const ReportDoc& d) {
  auto opt = [](const auto& o) { return o ? to_json(*o) : json(nullptr); };
  return {{"provenance", prov_json(d.provenance)},
          {"summary", opt(d.summary)},
          {"joint_table", opt(d.joint)},
          {"kcbs", opt(d.kcbs)},
          {"certification", opt(d.certification)},
          {"extraction", opt(d.extraction)},
          {"battery", opt(d.battery)},
          {"tomography", opt(d.tomography)},
          {"curve", opt(d.curve)}};
}

ReportDoc report_from_json(const json& j) {
  ReportDoc d;
  d.provenance = prov_from(j);
  auto load = [&](const char* key, auto& slot, auto parse) {
    const json& v = field(j, key);
    if (!v.is_null()) slot = parse(v);
  };
  load("summary", d.summary, summary_from_json);
  load("joint_table", d.joint, joint_from_json);
  load("kcbs", d.kcbs, kcbs_from_json);
  load("certification", d.certification, certification_from_json);
  load("extraction", d.extraction, extraction_from_json);
  load("battery", d.battery, battery_from_json);
  load("tomography", d.tomography, tomography_from_json);
  load("curve", d.curve, curve_from_json);
  return d;
}

std::string report_markdown(const ReportDoc& d) {
  std::string out;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  out += "# qrng run report\n\n";
  line("config hash `%s`, seed %llu, format version %d\n\n", d.provenance.config_hash.c_str(),
       static_cast<unsigned long long>(d.provenance.seed), d.provenance.format_version);
  if (d.summary) {
    const auto& s = *d.summary;
    out += "## Simulation\n\n| quantity | value |\n|---|---|\n";
    line("| pulses | %llu |\n", static_cast<unsigned long long>(s.pulses));
    line("| heralded | %llu |\n", static_cast<unsigned long long>(s.heralded));
    line("| duration (s) | %.6g |\n", s.duration_s);
    line("| coincidence rate (1/s) | %.6g |\n", s.coincidence_rate);
    line("| raw bit rate (bit/s) | %.6g |\n", s.raw_bit_rate);
    line("| raw bits | %llu |\n", static_cast<unsigned long long>(s.raw_bits));
    line("| realized R | %.6f |\n\n", s.R);
  }
  if (d.joint) {
    out += "## Joint probabilities\n\n| context | P(-,+) | P(+,+) | P(+,-) | P(-,-) | <A_i A_i+1> |\n"
           "|---|---|---|---|---|---|\n";
    for (std::size_t c = 0; c < kcbs::kContexts; ++c) {
      const auto& r = d.joint->table[c];
      line("| %zu | %.4f | %.4f | %.4f | %.4f | %.4f |\n", c + 1, r.p_minus_plus, r.p_plus_plus,
           r.p_plus_minus, r.p_minus_minus, kcbs::expectation_from_joint(r));
    }
    out += "\n";
  }
  if (d.kcbs) {
    const auto& r = d.kcbs->result;
    out += "## KCBS\n\n";
    line("chi = %.4f, chi' = %.4f +- %.4f (R = %.4f)\n\n", r.chi, r.chi_mod, r.sigma, r.R);
  }
  if (d.certification) {
    const auto& r = d.certification->result;
    out += "## Certification\n\n| quantity | value |\n|---|---|\n";
    line("| worst-case chi | %.6f |\n", r.chi_worst);
    line("| delta | %.6f |\n", r.delta);
    line("| P_guess upper | %.6f |\n", r.p_guess_upper);
    line("| P_guess attack | %.6f |\n", r.p_guess_attack);
    line("| h_min (bits) | %.6f |\n", r.h_min);
    line("| certified rate (bit/s) | %.6g |\n\n", r.rate);
  }
  if (d.extraction) {
    const auto& e = *d.extraction;
    out += "## Extraction\n\n";
    line("%llu raw bits -> %llu output bits in %llu blocks (seed %s, fingerprint %016llx)\n\n",
         static_cast<unsigned long long>(e.input_bits), static_cast<unsigned long long>(e.output_bits),
         static_cast<unsigned long long>(e.blocks), e.seed_source.c_str(),
         static_cast<unsigned long long>(e.seed_fingerprint));
  }
  if (d.battery) {
    out += "## Statistical tests\n\n| test | statistic | p-value | result |\n|---|---|---|---|\n";
    for (const auto& t : d.battery->report.tests)
      line("| %s | %.6g | %.6f | %s |\n", t.name.c_str(), t.statistic, t.p_value,
           t.pass ? "PASS" : "FAIL");
    out += "\n";
  }
  if (d.tomography) {
    const auto& t = *d.tomography;
    out += "## Tomography\n\n";
    line("F = %.5f (bootstrap %.5f +- %.5f over %d resamples)\n\n", t.fidelity, t.fidelity_mean,
         t.fidelity_std, t.resamples);
  }
  if (d.curve) {
    out += "## Rate curve\n\n| chi | h_min | rate (bit/s) |\n|---|---|---|\n";
    for (const auto& p : d.curve->points)
      if (p.ok) line("| %.4f | %.6f | %.6g |\n", p.chi, p.h_min, p.rate);
      else line("| %.4f | - | %s |\n", p.chi, p.error.c_str());
    line("\nmonotone: %s\n", d.curve->monotone ? "yes" : "no");
  }
  return out;
}

}  // namespace cqrng::cli
