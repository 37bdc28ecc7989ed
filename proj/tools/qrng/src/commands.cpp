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


#include "cqrng/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cqrng/bitstream.hpp"
#include "cqrng/cli/artifacts.hpp"
#include "cqrng/cli/fsutil.hpp"
#include "cqrng/cli/svg.hpp"
#include "cqrng/error.hpp"
#include "cqrng/extractor.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/rng.hpp"
#include "cqrng/tomography.hpp"

namespace cqrng::cli {
namespace {

fs::path out_dir(const RunConfig& cfg) { return fs::path(cfg.output_dir); }

fs::path input_path(const RunConfig& cfg, const std::optional<std::string>& given, const char* name) {
  return given ? fs::path(*given) : out_dir(cfg) / name;
}

BitStream load_cqrn(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return read_cqrn(in);
}

void save_cqrn(const fs::path& path, const BitStream& bits) {
  std::ostringstream os(std::ios::binary);
  write_cqrn(os, bits);
  atomic_write(path, os.str());
}

json load_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::optional<SimulationSummary> maybe_summary(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  return summary_from_json(load_json(path));
}

double pick_round_rate(const std::optional<double>& configured, const std::optional<SimulationSummary>& s) {
  if (configured) return *configured;
  if (s) return s->raw_bit_rate;
  return kReferenceRoundRate;
}

Real3x3 part(const linalg::Matrix& m, bool imag) {
  Real3x3 out{};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) out[r][c] = imag ? m(r, c).imag() : m(r, c).real();
  return out;
}

void wrote(std::ostream& log, const fs::path& p) { log << "wrote " << p.string() << "\n"; }

}  // namespace

std::vector<std::uint8_t> derived_master_seed(std::uint64_t seed) {
  auto g = rng::stream(seed, kExtractorStream);
  std::vector<std::uint8_t> out(32);
  for (std::size_t i = 0; i < out.size(); i += 8) {
    const std::uint64_t w = g();
    for (std::size_t k = 0; k < 8; ++k) out[i + k] = static_cast<std::uint8_t>(w >> (8 * k));
  }
  return out;
}

void cmd_simulate(const RunConfig& cfg, unsigned threads, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const Provenance prov = provenance_of(cfg);
  photonics::RunOptions opt = cfg.run;
  opt.threads = threads;
  const auto run = photonics::run_simulation(resolve_plan(cfg), cfg.source, cfg.channel, cfg.noise,
                                             opt, cfg.seed);
  json resolved = to_json(cfg);
  resolved.erase("output_dir");  // keeps runs in different directories byte-identical
  atomic_write(dir / files::kConfig, dump(resolved));
  atomic_write(dir / files::kSummary, dump(to_json(make_summary(run, prov))));
  atomic_write(dir / files::kCounts, emit_counts(make_counts(run, prov)));
  save_cqrn(dir / files::kRaw, run.tally.bits);
  if (cfg.run.keep_events) {
    EventLog events{prov, cfg.source.rep_rate, run.tally.records};
    atomic_write(dir / files::kEvents, emit_events(events));
  }
  log << "simulated " << run.tally.pulses << " pulses, " << run.tally.bits.size()
      << " raw bits, raw bit rate " << run.raw_bit_rate << " /s\n";
  wrote(log, dir);
}

void cmd_analyze(const RunConfig& cfg, const AnalyzeOptions& opt, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const Provenance prov = provenance_of(cfg);
  const fs::path in = input_path(cfg, opt.input, files::kCounts);
  const CsvDoc csv = parse_csv(read_text(in));
  JointTableDoc joint;
  joint.provenance = prov;
  const bool counts = std::find(csv.header.begin(), csv.header.end(), "n0") != csv.header.end();
  if (counts) {
    joint.table = joint_from_counts(counts_from_csv(csv), cfg.channel.detector_eff);
  } else {
    joint.table = joint_from_csv(csv).table;
  }
  KcbsDoc k{prov, kcbs::analyze_table(joint.table, cfg.analysis.overlap, cfg.analysis.overlap_sigma)};
  atomic_write(dir / files::kJoint, emit_joint(joint));
  atomic_write(dir / files::kKcbs, dump(to_json(k)));
  char buf[160];
  std::snprintf(buf, sizeof buf, "chi = %.4f, chi' = %.4f +- %.4f (R = %.3f)\n", k.result.chi,
                k.result.chi_mod, k.result.sigma, k.result.R);
  log << buf;
  wrote(log, dir / files::kKcbs);
}

void cmd_certify(const RunConfig& cfg, const CertifyOptions& opt, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const Provenance prov = provenance_of(cfg);
  certifier::CertificationProblem prob = certification_problem(cfg);
  if (!cfg.certifier.chi_hat)
    prob.chi_hat = kcbs_from_json(load_json(input_path(cfg, opt.kcbs, files::kKcbs))).result.chi;
  const auto summary = maybe_summary(input_path(cfg, opt.summary, files::kSummary));
  if (!cfg.certifier.n_rounds && summary) {
    prob.n_rounds = *std::min_element(summary->events.begin(), summary->events.end());
    if (prob.n_rounds == 0) throw UndersizedDataError("a context recorded no events");
  }
  const double rate = pick_round_rate(cfg.certifier.round_rate, summary);
  CertificationDoc doc{prov, prob,
                       certifier::certify(prob, rate, cfg.certifier.solver, cfg.certifier.attack)};
  atomic_write(dir / files::kCertification, dump(to_json(doc)));
  const auto& r = doc.result;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "worst-case chi %.4f: P_guess <= %.5f (attack %.5f), h_min = %.5f, rate = %.6g bit/s\n",
                r.chi_worst, r.p_guess_upper, r.p_guess_attack, r.h_min, r.rate);
  log << buf;
  wrote(log, dir / files::kCertification);
}

void cmd_extract(const RunConfig& cfg, const ExtractOptions& opt, unsigned threads, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const Provenance prov = provenance_of(cfg);
  const BitStream raw = load_cqrn(input_path(cfg, opt.input, files::kRaw));
  const auto cert =
      certification_from_json(load_json(input_path(cfg, opt.certification, files::kCertification)));
  std::vector<std::uint8_t> master;
  std::string source;
  if (cfg.extractor.os_seed) {
    master = extractor::os_seed(32);
    source = "os";
  } else if (cfg.extractor.seed_file) {
    master = read_bytes(*cfg.extractor.seed_file);
    source = "file";
  } else {
    master = derived_master_seed(cfg.seed);
    source = "derived";
  }
  const auto res = extractor::extract_stream(raw, cert.result.h_min, cfg.extractor.eps_sec, master,
                                             cfg.extractor.block_bits, threads);
  ExtractionDoc doc;
  doc.provenance = prov;
  doc.seed_source = source;
  doc.seed_fingerprint = extractor::seed_fingerprint(master);
  doc.input_bits = raw.size();
  doc.output_bits = res.bits.size();
  doc.h_min = res.h_min;
  doc.eps_sec = res.eps_sec;
  doc.block_bits = res.block_bits;
  doc.output_per_block = res.output_per_block;
  doc.blocks = res.blocks;
  doc.dropped_bits = res.dropped_bits;
  save_cqrn(dir / files::kExtracted, res.bits);
  atomic_write(dir / files::kExtraction, dump(to_json(doc)));
  log << "extracted " << res.bits.size() << " bits from " << raw.size() << " raw bits in "
      << res.blocks << " blocks\n";
  wrote(log, dir / files::kExtracted);
}

void cmd_battery(const RunConfig& cfg, const BatteryOptions& opt, unsigned threads, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const fs::path in = input_path(cfg, opt.input, files::kExtracted);
  const BitStream bits = load_cqrn(in);
  BatteryDoc doc;
  doc.provenance = provenance_of(cfg);
  doc.input = in.filename().string();
  doc.report = battery::run_battery(bits, threads);
  atomic_write(dir / files::kBattery, dump(to_json(doc)));
  log << battery_table(doc.report);
  wrote(log, dir / files::kBattery);
}

void cmd_tomo(const RunConfig& cfg, const TomoOptions& opt, unsigned threads, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const auto mubs = tomography::mub_set();
  const linalg::Matrix target = linalg::projector(kcbs::optimal_state());
  TomographyDoc doc;
  doc.provenance = provenance_of(cfg);
  if (opt.input) {
    doc.data = tomography_data_from_json(load_json(*opt.input));
    doc.source = fs::path(*opt.input).filename().string();
  } else {
    const std::array<double, 3> eta = cfg.tomography.eta.value_or(std::array<double, 3>{1.0, 1.0, 1.0});
    doc.data = tomography::simulate_counts(target, mubs, cfg.tomography.shots_per_basis,
                                           rng::derive(cfg.seed, kTomographyStream), eta);
    doc.source = "simulated";
  }
  tomography::MLEOptions mo;
  mo.max_iterations = cfg.tomography.max_iterations;
  mo.tolerance = cfg.tomography.tolerance;
  const auto mle = tomography::mle_reconstruct(doc.data, mubs, mo);
  doc.rho_re = part(mle.rho, false);
  doc.rho_im = part(mle.rho, true);
  doc.log_likelihood = mle.log_likelihood;
  doc.iterations = mle.iterations;
  doc.converged = mle.converged;
  doc.fidelity = tomography::fidelity(mle.rho, target);
  if (cfg.tomography.bootstrap > 0) {
    const auto b = tomography::bootstrap_uncertainty(doc.data, mubs, target, cfg.tomography.bootstrap,
                                                     rng::derive(cfg.seed, kTomographyStream + 1),
                                                     threads);
    doc.resamples = b.resamples;
    doc.fidelity_mean = b.fidelity_mean;
    doc.fidelity_std = b.fidelity_std;
    doc.rho_std_re = part(b.rho_std, false);
    doc.rho_std_im = part(b.rho_std, true);
  }
  atomic_write(dir / files::kTomography, dump(to_json(doc)));
  char buf[160];
  std::snprintf(buf, sizeof buf, "fidelity %.5f (bootstrap %.5f +- %.5f)\n", doc.fidelity,
                doc.fidelity_mean, doc.fidelity_std);
  log << buf;
  wrote(log, dir / files::kTomography);
}

void cmd_curve(const RunConfig& cfg, unsigned threads, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  const auto summary = maybe_summary(dir / files::kSummary);
  const std::vector<double> grid = cfg.curve.grid ? *cfg.curve.grid : certifier::default_grid(cfg.curve.points);
  CurveDoc doc;
  doc.provenance = provenance_of(cfg);
  doc.round_rate = pick_round_rate(cfg.curve.round_rate, summary);
  const auto curve = certifier::rate_curve(certification_problem(cfg), grid, doc.round_rate,
                                           cfg.certifier.solver, threads);
  doc.points = curve.points;
  doc.monotone = curve.monotone;
  const std::string csv = emit_curve(doc);
  atomic_write(dir / files::kCurveCsv, csv);
  // The plot is drawn from the CSV as written.
  const CurveDoc back = curve_from_csv(parse_csv(csv));
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : back.points)
    if (p.ok) pts.emplace_back(p.chi, p.h_min);
  if (!pts.empty()) {
    PlotOptions po;
    po.title = "Certified min-entropy per post-selected round";
    po.x_label = "worst-case KCBS sum";
    po.y_label = "h_min (bits)";
    atomic_write(dir / files::kCurveSvg, render_svg(pts, po));
  }
  log << doc.points.size() << " curve points, monotone: " << (doc.monotone ? "yes" : "no") << "\n";
  wrote(log, dir / files::kCurveCsv);
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = out_dir(cfg);
  DirLock lock(dir);
  ReportDoc doc;
  doc.provenance = provenance_of(cfg);
  auto has = [&](const char* name) { return fs::exists(dir / name); };
  if (has(files::kSummary)) doc.summary = summary_from_json(load_json(dir / files::kSummary));
  if (has(files::kJoint)) doc.joint = joint_from_csv(parse_csv(read_text(dir / files::kJoint)));
  if (has(files::kKcbs)) doc.kcbs = kcbs_from_json(load_json(dir / files::kKcbs));
  if (has(files::kCertification))
    doc.certification = certification_from_json(load_json(dir / files::kCertification));
  if (has(files::kExtraction)) doc.extraction = extraction_from_json(load_json(dir / files::kExtraction));
  if (has(files::kBattery)) doc.battery = battery_from_json(load_json(dir / files::kBattery));
  if (has(files::kTomography)) doc.tomography = tomography_from_json(load_json(dir / files::kTomography));
  if (has(files::kCurveCsv)) doc.curve = curve_from_csv(parse_csv(read_text(dir / files::kCurveCsv)));
  atomic_write(dir / files::kReportJson, dump(to_json(doc)));
  atomic_write(dir / files::kReportMd, report_markdown(doc));
  wrote(log, dir / files::kReportMd);
}

// ---- command line ------------------------------------------------------------

namespace {

void error_json(std::ostream& err, const char* kind, int code, const std::string& msg,
                const std::string& key = {}) {
  json j = {{"error", kind}, {"exit_code", code}, {"message", msg}};
  if (!key.empty()) j["key"] = key;
  err << j.dump() << "\n";
}

struct Common {
  std::string config;
  std::string preset = "reference";
  std::optional<std::uint64_t> seed;
  std::string out;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? preset(c.preset) : parse_config_text(read_text(c.config));
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qrng: simulate, certify and extract contextuality-certified random bits"};
  app.name("qrng");
  app.require_subcommand(1, 1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "run configuration (JSON)");
    sub->add_option("--preset", common.preset, "built-in configuration when --config is absent")
        ->check(CLI::IsMember(preset_names()));
    sub->add_option("--seed", common.seed, "64-bit run seed (overrides the config)");
    sub->add_option("--out", common.out, "output directory (overrides the config)");
  };

  auto* sim = app.add_subcommand("simulate", "Monte Carlo run: summary, counts, raw bits");
  add_common(sim);
  bool keep_events = false;
  sim->add_flag("--events", keep_events, "also write the per-event log");

  auto* ana = app.add_subcommand("analyze", "joint probabilities and KCBS value from counts");
  add_common(ana);
  AnalyzeOptions aopt;
  std::optional<double> overlap;
  ana->add_option("--input", aopt.input, "counts.csv or joint-table CSV");
  ana->add_option("--overlap", overlap, "measured <A1 A1'>");

  auto* cer = app.add_subcommand("certify", "min-entropy bound and certified rate");
  add_common(cer);
  CertifyOptions copt;
  std::optional<double> chi;
  cer->add_option("--chi", chi, "observed five-term sum (skips kcbs.json)");
  cer->add_option("--kcbs", copt.kcbs, "KCBS result JSON");
  cer->add_option("--summary", copt.summary, "simulation summary JSON");

  auto* ext = app.add_subcommand("extract", "Toeplitz extraction of the raw bits");
  add_common(ext);
  ExtractOptions eopt;
  std::string seed_file;
  bool os_seed = false;
  ext->add_option("--input", eopt.input, "raw CQRN stream");
  ext->add_option("--certification", eopt.certification, "certification JSON");
  ext->add_option("--seed-file", seed_file, "master seed bytes (at least 8)");
  ext->add_flag("--os-seed", os_seed, "draw the master seed from the OS");

  auto* bat = app.add_subcommand("battery", "statistical tests on a CQRN stream");
  add_common(bat);
  BatteryOptions bopt;
  bat->add_option("--input", bopt.input, "CQRN stream (default: extracted.cqrn)");

  auto* tom = app.add_subcommand("tomo", "MLE state reconstruction from three-basis counts");
  add_common(tom);
  TomoOptions topt;
  bool tomo_sim = false;
  tom->add_option("--input", topt.input, "counts JSON");
  tom->add_flag("--simulate", tomo_sim, "synthesize counts of the optimal state (default)");

  auto* cur = app.add_subcommand("curve", "certified min-entropy across KCBS values (CSV + SVG)");
  add_common(cur);
  std::optional<std::size_t> points;
  std::vector<double> grid;
  cur->add_option("--points", points, "evenly spaced grid size");
  cur->add_option("--grid", grid, "explicit worst-case values")->delimiter(',');

  auto* rep = app.add_subcommand("report", "aggregate every artifact of a run directory");
  add_common(rep);

  auto* cfgc = app.add_subcommand("config", "print the resolved configuration");
  add_common(cfgc);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    error_json(err, "usage", kExitConfig, e.what());
    return kExitConfig;
  }

  try {
    RunConfig cfg = load(common);
    if (sim->parsed() && keep_events) cfg.run.keep_events = true;
    if (overlap) cfg.analysis.overlap = *overlap;
    if (chi) cfg.certifier.chi_hat = *chi;
    if (!seed_file.empty()) cfg.extractor.seed_file = seed_file;
    if (os_seed) cfg.extractor.os_seed = true;
    if (points) cfg.curve.points = *points;
    if (!grid.empty()) cfg.curve.grid = grid;
    validate(cfg);
    const unsigned threads = resolve_threads();

    if (sim->parsed()) cmd_simulate(cfg, threads, out);
    else if (ana->parsed()) cmd_analyze(cfg, aopt, out);
    else if (cer->parsed()) cmd_certify(cfg, copt, out);
    else if (ext->parsed()) cmd_extract(cfg, eopt, threads, out);
    else if (bat->parsed()) cmd_battery(cfg, bopt, threads, out);
    else if (tom->parsed()) cmd_tomo(cfg, topt, threads, out);
    else if (cur->parsed()) cmd_curve(cfg, threads, out);
    else if (rep->parsed()) cmd_report(cfg, out);
    else if (cfgc->parsed()) out << dump(to_json(cfg));
    return kExitOk;
  } catch (const ConfigError& e) {
    error_json(err, "invalid_config", kExitConfig, e.what(), e.key());
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    error_json(err, "infeasible", kExitInfeasible, e.what());
    return kExitInfeasible;
  } catch (const UndersizedDataError& e) {
    error_json(err, "undersized_data", kExitUndersized, e.what());
    return kExitUndersized;
  } catch (const InvalidArgument& e) {
    error_json(err, "invalid_input", kExitConfig, e.what());
    return kExitConfig;
  } catch (const DimensionError& e) {
    error_json(err, "invalid_input", kExitConfig, e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    error_json(err, "error", kExitError, e.what());
    return kExitError;
  }
}

}  // namespace cqrng::cli
