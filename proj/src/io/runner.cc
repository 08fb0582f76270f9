// Copyright 2026 The nvlayer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nvlayer/io/runner.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>

#include <yaml-cpp/yaml.h>

#include "nvlayer/analysis/decay.h"
#include "nvlayer/analysis/gen_normal.h"
#include "nvlayer/analysis/spectral.h"
#include "nvlayer/analysis/transfer.h"
#include "nvlayer/errors.h"
#include "nvlayer/pauli/table_cache.h"
#include "nvlayer/util/thread_pool.h"

namespace nvlayer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path config_dir(const ExperimentConfig& cfg) {
  return cfg.source.has_parent_path() ? cfg.source.parent_path() : fs::path(".");
}

Vec3 vec3_from(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 3) throw ConfigError(what + ": expected three components");
  return Vec3(v[0], v[1], v[2]);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(finite_or_null(m(i, j)));
    a.push_back(r);
  }
  return a;
}

json seeds_json(const std::vector<Eigen::VectorXd>& seeds) {
  json a = json::array();
  for (const auto& s : seeds) a.push_back(to_json(std::vector<double>(s.data(), s.data() + s.size())));
  return a;
}

json fit_json(const GenNormalFit& f) {
  json j;
  json peaks = json::array();
  for (const auto& p : f.peaks) {
    peaks.push_back({{"mu", p.mu},
                     {"alpha", p.alpha},
                     {"beta", p.beta},
                     {"amplitude", p.amplitude},
                     {"variance", p.variance},
                     {"variance_sd", finite_or_null(p.variance_sd)}});
  }
  j["model"] = "c exp(-lambda (x - x0)) + sum A exp(-(|x - mu| / alpha)^beta)";
  j["peaks"] = peaks;
  j["baseline"] = f.baseline;
  j["decay_rate"] = f.decay_rate;
  j["x0"] = f.x0;
  j["param_names"] = f.param_names;
  j["params"] = to_json(std::vector<double>(f.params.data(), f.params.data() + f.params.size()));
  j["covariance"] = to_json(f.covariance);
  j["r2"] = f.r2;
  j["rss"] = f.rss;
  j["residual_norm"] = std::sqrt(f.rss);
  j["converged"] = f.converged;
  j["degenerate"] = f.degenerate;
  j["seeds"] = seeds_json(f.seeds);
  j["best_seed"] = f.best_seed;
  return j;
}

json candidate_json(const DecayCandidate& c) {
  return {{"form", decay_form_name(c.form)},
          {"a", c.a},
          {"gamma", c.gamma},
          {"gamma_sd", finite_or_null(c.gamma_sd)},
          {"n", c.n},
          {"b", c.b},
          {"r2", c.r2},
          {"rss", c.rss},
          {"residual_norm", std::sqrt(c.rss)},
          {"converged", c.converged},
          {"seeds", seeds_json(c.seeds)},
          {"best_seed", c.best_seed}};
}

json decay_json(const DecayFit& f) {
  return {{"model", "a cos(w N) exp(-(gamma N)^n) + b"},
          {"theta", f.theta},
          {"window", f.window},
          {"best", candidate_json(f.best)},
          {"cos_theta", candidate_json(f.cos_theta)},
          {"cos_pi", candidate_json(f.cos_pi)}};
}

Table trace_table(const TimeTrace& tr) {
  Table t;
  t.names.push_back(tr.axis_name);
  for (const auto& n : tr.names) t.names.push_back(n);
  for (std::size_t i = 0; i < tr.axis.size(); ++i) {
    std::vector<double> row{tr.axis[i]};
    for (const auto& c : tr.columns) row.push_back(c[i]);
    t.add_row(row);
  }
  return t;
}

// Output bookkeeping shared by the protocol handlers.
struct Sink {
  const ExperimentConfig& cfg;
  std::vector<fs::path> outputs;
  json cache = json::array();

  fs::path path(const std::string& suffix) const {
    return cfg.output_dir / (cfg.output_stem + suffix);
  }
  void csv(const Table& t, const std::string& suffix = ".csv") {
    const fs::path p = path(suffix);
    write_csv(p, t, cfg.run_id());
    outputs.push_back(p);
  }
  void report(json j, const std::string& suffix = ".report.json") {
    const fs::path p = path(suffix);
    j["run_id"] = cfg.run_id();
    write_report(p, std::move(j));
    outputs.push_back(p);
  }
};

std::size_t to_size(long long v, const std::string& what) {
  if (v < 0) throw ConfigError(what + ": must be nonnegative");
  return static_cast<std::size_t>(v);
}

NuclearSequenceOptions sequence_options(const ExperimentConfig& cfg, const ConfigSection& s,
                                        ThreadPool* pool) {
  const EngineSettings eng = engine_from_config(cfg, EngineKind::kDense);
  NuclearSequenceOptions o;
  o.engine = eng.kind;
  o.kernel = eng.kernel;
  o.taylor_order = eng.taylor_order;
  o.step_bound = eng.step_bound;
  o.truncation = eng.truncation;
  o.max_dense_spins = eng.max_dense_spins;
  o.pool = pool;
  if (s.has_quantity("detunings", Dim::kFrequency)) {
    o.detunings = s.quantities("detunings", Dim::kFrequency);
    for (double& d : o.detunings) d *= constants::kTwoPi;
  }
  const long long sign = s.integer("readout_sign", 1);
  if (sign != 1 && sign != -1) throw ConfigError(s.path() + ".readout_sign: must be +1 or -1");
  o.readout_sign = static_cast<int>(sign);
  o.dephasing = dephasing_from_config(cfg.section("dephasing"), cfg.seed);
  return o;
}

const std::vector<KeySpec> kSequenceKeys = {
    plain("times_grid"),           quantity("times", Dim::kTime),
    quantity("detunings", Dim::kFrequency), plain("readout_sign"),
    quantity("tau", Dim::kTime),   plain("n_cycles"),
};

json one_over_e_json(const TimeTrace& tr) {
  const auto t = one_over_e_time(tr.axis, tr.column("mean_z"));
  return t ? json(*t) : json(nullptr);
}

// ---------------------------------------------------------------------------------------------
// Protocol handlers

struct AxyRun {
  Spectrum spectrum;
  std::optional<GenNormalFit> fit;
};

AxySpectrumOptions axy_options(const ExperimentConfig& cfg, const EngineSettings& eng,
                               ThreadPool* pool) {
  const ConfigSection s = cfg.section("axy");
  AxySpectrumOptions o;
  if (s.has("f")) {
    const auto f = s.numbers("f");
    if (f.size() != 4) throw ConfigError("axy.f: expected four Fourier coefficients");
    for (int k = 0; k < 4; ++k) o.f[k] = f[k];
  }
  o.n_reps = to_size(s.integer("n_reps", 30), "axy.n_reps");
  o.n_blocks = to_size(s.integer("n_blocks", 0), "axy.n_blocks");
  o.engine = eng.kind;
  o.truncation = eng.truncation;
  o.kernel = eng.kernel;
  o.taylor_order = eng.taylor_order;
  o.step_bound = eng.step_bound;
  o.lane_batch = eng.lane_batch;
  o.max_dense_spins = eng.max_dense_spins;
  o.pool = pool;
  return o;
}

const std::vector<KeySpec> kAxyKeys = {plain("f"), plain("n_reps"), plain("n_blocks"),
                                       quantity("frequencies", Dim::kFrequency),
                                       plain("frequencies_grid"), plain("fit")};

json cache_entry_json(const TableCache& cache, std::uint64_t bh, std::uint64_t hh,
                      TableLayout layout, bool present) {
  char b[17], h[17];
  std::snprintf(b, sizeof(b), "%016llx", static_cast<unsigned long long>(bh));
  std::snprintf(h, sizeof(h), "%016llx", static_cast<unsigned long long>(hh));
  return {{"basis_hash", b},
          {"hamiltonian_hash", h},
          {"path", cache.path_for(bh, hh, layout).string()},
          {"hit", present}};
}

void run_axy(const ExperimentConfig& cfg, ThreadPool& pool, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  const EngineSettings eng = engine_from_config(cfg, EngineKind::kTruncated);
  const ConfigSection s = cfg.section("axy");
  s.restrict_to(kAxyKeys);
  AxySpectrumOptions opt = axy_options(cfg, eng, &pool);
  const std::vector<double> freqs = grid_from_config(s, "frequencies", Dim::kFrequency);

  std::unique_ptr<TableCache> cache;
  if (eng.use_cache && eng.kind == EngineKind::kTruncated && sys.num_nuclei() > 0) {
    cache = std::make_unique<TableCache>(eng.cache_dir);
    const TruncatedBasis basis = TruncatedBasis::enumerate(sys.num_nuclei(), eng.truncation, &sys.layout);
    const HamiltonianTerms h = build_secular_hamiltonian(sys.layout, sys.couplings, sys.hamiltonian);
    const bool present = cache->load(basis.hash(), h.hash(), opt.table_layout).has_value();
    sink.cache.push_back(cache_entry_json(*cache, basis.hash(), h.hash(), opt.table_layout, present));
    opt.cache = cache.get();
  }

  const Spectrum sp = run_axy_spectrum(sys, freqs, opt);
  Table t;
  t.names = {"frequency_hz", "tau_s", "tau_ns", "signal"};
  for (std::size_t i = 0; i < sp.signal.size(); ++i) {
    t.add_row({sp.frequency_hz[i], sp.tau_s[i], sp.tau_s[i] * 1e9, sp.signal[i]});
  }
  sink.csv(t);

  json rep;
  rep["engine"] = engine_name(sp.engine);
  rep["basis_size"] = sp.basis_size;
  rep["n_nuclei"] = sys.num_nuclei();
  rep["timing"] = {{"f", sp.timing.f}, {"x1", sp.timing.x1}, {"x2", sp.timing.x2}};
  rep["truncation"] = {{"n_entries", sp.stats.n_entries},
                       {"n_dropped", sp.stats.n_dropped},
                       {"dropped_weight_fraction", sp.stats.dropped_weight_fraction}};
  summary["engine"] = rep["engine"];
  const ConfigSection fit = s.child("fit");
  if (fit.defined()) {
    fit.restrict_to({plain("n_peaks"), plain("envelope"), plain("distance")});
    std::vector<double> x(sp.tau_s.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = sp.tau_s[i] * 1e9;
    GenNormalOptions go;
    go.fit_envelope = fit.boolean("envelope", true);
    // The transfer function expects variances in ns^2, so the fit runs on tau in ns.
    const GenNormalFit f =
        fit_generalized_normal(x, sp.signal, to_size(fit.integer("n_peaks", 1), "axy.fit.n_peaks"), go);
    rep["fit"] = fit_json(f);
    rep["fit"]["x_units"] = "ns";
    if (fit.boolean("distance", true)) {
      json d = json::array();
      for (const auto& p : f.peaks) {
        if (!(p.variance > TransferFunction{}.v0)) {
          d.push_back({{"variance_ns2", p.variance}, {"distance_nm", nullptr}, {"in_range", false}});
          continue;
        }
        const DistanceEstimate e = distance_from_variance(p.variance, p.variance_sd);
        d.push_back({{"variance_ns2", p.variance},
                     {"distance_nm", e.distance_nm},
                     {"sd_nm", finite_or_null(e.sd_nm)},
                     {"in_range", e.in_range}});
      }
      rep["distances"] = d;
    }
    summary["r2"] = f.r2;
  }
  sink.report(rep);
}

void run_novel_protocol(const ExperimentConfig& cfg, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  const ConfigSection s = cfg.section("novel");
  s.restrict_to({quantity("spinlock", Dim::kTime), quantity("wait", Dim::kTime),
                 plain("repetitions"), quantity("omega", Dim::kFrequency), plain("drive"),
                 plain("layer_sites"), plain("readout")});
  NovelParams p;
  p.spinlock_s = s.quantity("spinlock", Dim::kTime, p.spinlock_s);
  p.wait_s = s.quantity("wait", Dim::kTime, p.wait_s);
  p.repetitions = to_size(s.integer("repetitions", 100), "novel.repetitions");
  p.omega = constants::kTwoPi * s.quantity("omega", Dim::kFrequency, 0.0);
  const std::string drive = s.string("drive", "y");
  if (drive == "y") {
    p.drive = DriveAxis::kY;
  } else if (drive == "x") {
    p.drive = DriveAxis::kX;
  } else {
    throw ConfigError("novel.drive: expected x or y");
  }
  p.max_dense_spins = engine_from_config(cfg, EngineKind::kDense).max_dense_spins;
  std::vector<std::size_t> layer;
  if (s.has("layer_sites")) {
    for (double v : s.numbers("layer_sites")) layer.push_back(to_size(static_cast<long long>(v), "novel.layer_sites"));
  }
  const NovelResult r = run_novel(sys, p, layer);
  Table t;
  t.names = {"repetition", "flip_probability_up", "flip_probability_down", "layer_polarization_up",
             "layer_polarization_down"};
  for (std::size_t m = 0; m < r.up.flip_probability.size(); ++m) {
    t.add_row({static_cast<double>(m + 1), r.up.flip_probability[m], r.down.flip_probability[m],
               r.up.layer_polarization[m], r.down.layer_polarization[m]});
  }
  sink.csv(t);
  json rep;
  rep["final_site_polarization_up"] = to_json(r.up.final_site_polarization);
  rep["final_site_polarization_down"] = to_json(r.down.final_site_polarization);
  rep["layer_polarization_up"] = r.up.layer_polarization.back();
  rep["layer_polarization_down"] = r.down.layer_polarization.back();
  const ConfigSection ro = s.child("readout");
  if (ro.defined()) {
    ro.restrict_to({plain("rabi_amplitude"), plain("rabi_offset")});
    rep["readout"] = novel_readout(r.down.flip_probability, r.up.flip_probability,
                                   ro.number("rabi_amplitude"), ro.number("rabi_offset"));
  }
  summary["layer_polarization_up"] = rep["layer_polarization_up"];
  sink.report(rep);
}

void run_sequence(const ExperimentConfig& cfg, ThreadPool& pool, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  const ConfigSection s = cfg.section("sequence");
  s.restrict_to(kSequenceKeys);
  const NuclearSequenceOptions o = sequence_options(cfg, s, &pool);
  TimeTrace tr;
  if (cfg.protocol == "ramsey") {
    tr = run_ramsey(sys, grid_from_config(s, "times", Dim::kTime), o);
  } else if (cfg.protocol == "hahn") {
    tr = run_hahn(sys, grid_from_config(s, "times", Dim::kTime), o);
  } else {
    tr = run_wahuha(sys, s.quantity("tau", Dim::kTime),
                    to_size(s.integer("n_cycles"), "sequence.n_cycles"), o);
  }
  sink.csv(trace_table(tr));
  json rep;
  rep["engine"] = engine_name(o.engine);
  rep["one_over_e_time_s"] = one_over_e_json(tr);
  summary["one_over_e_time_s"] = rep["one_over_e_time_s"];
  sink.report(rep);
}

struct DtcSettings {
  DtcParams params;
  std::string observable = "mean_z";
  std::size_t window = 40;
  bool baseline = false;
};

const std::vector<KeySpec> kDtcKeys = {
    quantity("theta", Dim::kAngle), quantity("tau", Dim::kTime), quantity("taus", Dim::kTime),
    plain("taus_grid"),             plain("n_cycles"),           quantity("rabi", Dim::kFrequency),
    plain("finite_pulse"),          plain("observable"),         plain("window"),
    plain("baseline_correct")};

DtcSettings dtc_settings(const ConfigSection& s) {
  s.restrict_to(kDtcKeys);
  DtcSettings d;
  d.params.theta = s.quantity("theta", Dim::kAngle, d.params.theta);
  d.params.tau_s = s.quantity("tau", Dim::kTime, 0.0);
  d.params.n_cycles = to_size(s.integer("n_cycles", 40), "dtc.n_cycles");
  d.params.rabi = constants::kTwoPi * s.quantity("rabi", Dim::kFrequency, d.params.rabi / constants::kTwoPi);
  d.params.finite_pulse = s.boolean("finite_pulse", true);
  d.observable = s.string("observable", "mean_z");
  if (d.observable != "mean_z" && d.observable != "weighted_z") {
    throw ConfigError("dtc.observable: expected mean_z or weighted_z");
  }
  d.window = to_size(s.integer("window", 40), "dtc.window");
  d.baseline = s.boolean("baseline_correct", false);
  return d;
}

struct DtcPoint {
  TimeTrace trace;
  double c = 0.0;
  double peak_nu = 0.0;
  std::optional<DecayFit> fit;
  std::string fit_error;
};

DtcPoint analyze_dtc(TimeTrace tr, const DtcSettings& d) {
  DtcPoint pt;
  const std::vector<double>& y = tr.column(d.observable);
  std::vector<double> series = y;
  try {
    DecayOptions o;
    o.window = d.window;
    pt.fit = fit_decay(y, d.params.theta, o);
    if (d.baseline) series = baseline_correct(y, *pt.fit);
  } catch (const FitError& e) {
    pt.fit_error = e.what();
  }
  CrystallineOptions co;
  co.exclude_dc = d.baseline && pt.fit.has_value();
  pt.c = crystalline_fraction(series, co);
  pt.peak_nu = peak_frequency(psd(series));
  pt.trace = std::move(tr);
  return pt;
}

void run_dtc_protocol(const ExperimentConfig& cfg, ThreadPool& pool, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  const DtcSettings d = dtc_settings(cfg.section("dtc"));
  const auto deph = dephasing_from_config(cfg.section("dephasing"), cfg.seed);
  const DtcPoint pt = analyze_dtc(run_dtc(sys, d.params, deph, &pool), d);
  if (!pt.fit) throw FitError("DTC decay fit failed: " + pt.fit_error, 0.0);
  sink.csv(trace_table(pt.trace));
  json rep;
  rep["observable"] = d.observable;
  rep["crystalline_fraction"] = pt.c;
  rep["crystalline_fraction_options"] = {{"squared", true}, {"exclude_dc", d.baseline}};
  rep["peak_frequency_cycles"] = pt.peak_nu;
  rep["decay_fit"] = decay_json(*pt.fit);
  summary["crystalline_fraction"] = pt.c;
  sink.report(rep);
}

void run_dtc_sweep(const ExperimentConfig& cfg, ThreadPool& pool, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  const ConfigSection s = cfg.section("dtc");
  const DtcSettings d = dtc_settings(s);
  const std::vector<double> taus = grid_from_config(s, "taus", Dim::kTime);
  const auto deph = dephasing_from_config(cfg.section("dephasing"), cfg.seed);
  std::vector<DtcPoint> pts(taus.size());
  auto one = [&](std::size_t i, ThreadPool* inner) {
    DtcSettings di = d;
    di.params.tau_s = taus[i];
    pts[i] = analyze_dtc(run_dtc(sys, di.params, deph, inner), di);
  };
  // Dephased runs parallelize over sample paths; pure runs over sweep points.
  if (deph && deph->active()) {
    for (std::size_t i = 0; i < taus.size(); ++i) one(i, &pool);
  } else {
    pool.parallel_for(taus.size(), [&](std::size_t i) { one(i, nullptr); });
  }
  Table t;
  t.names = {"tau_s", "crystalline_fraction", "gamma", "n", "r2", "form"};
  json fits = json::array();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const DtcPoint& p = pts[i];
    const double nan = std::nan("");
    const DecayCandidate* b = p.fit ? &p.fit->best : nullptr;
    t.add_row({format_number(taus[i]), format_number(p.c), format_number(b ? b->gamma : nan),
               format_number(b ? b->n : nan), format_number(b ? b->r2 : nan),
               b ? decay_form_name(b->form) : "none"});
    fits.push_back(p.fit ? decay_json(*p.fit) : json{{"error", p.fit_error}});
  }
  sink.csv(t);
  json rep;
  rep["observable"] = d.observable;
  rep["theta"] = d.params.theta;
  rep["tau_s"] = taus;
  rep["fits"] = fits;
  sink.report(rep);
  summary["points"] = taus.size();
}

void run_distance_table(const ExperimentConfig& cfg, Sink& sink, json& summary) {
  const ConfigSection s = cfg.section("distance_table");
  s.restrict_to({plain("rows"), plain("constant_errors")});
  const bool constant_errors = s.boolean("constant_errors", true);
  if (!s.has("rows") || !s.node()["rows"].IsSequence()) {
    throw ConfigError("distance_table.rows: expected a list of rows");
  }
  Table t;
  t.names = {"label", "variance_ns2", "variance_sd_ns2", "distance_nm", "distance_sd_nm", "in_range",
             "published_nm", "published_sd_nm"};
  const YAML::Node rows = s.node()["rows"];
  std::size_t n_out = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConfigSection r(rows[i], "distance_table.rows[" + std::to_string(i) + "]");
    r.restrict_to({plain("label"), quantity("variance", Dim::kVariance),
                   quantity("variance_sd", Dim::kVariance), quantity("published", Dim::kLength),
                   quantity("published_sd", Dim::kLength)});
    const double v = r.quantity("variance", Dim::kVariance);
    const double sd = r.quantity("variance_sd", Dim::kVariance, 0.0);
    const DistanceEstimate e = distance_from_variance(v, sd, TransferFunction{}, constant_errors);
    n_out += e.in_range ? 0 : 1;
    const double nan = std::nan("");
    t.add_row({r.string("label", std::to_string(i + 1)), format_number(v), format_number(sd),
               format_number(e.distance_nm), format_number(e.sd_nm), e.in_range ? "1" : "0",
               format_number(r.quantity("published", Dim::kLength, nan)),
               format_number(r.quantity("published_sd", Dim::kLength, nan))});
  }
  sink.csv(t);
  summary["rows"] = t.rows.size();
  summary["out_of_range"] = n_out;
}

double max_abs_dev(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void run_validate(const ExperimentConfig& cfg, ThreadPool& pool, Sink& sink, json& summary) {
  const SpinSystem sys = system_from_config(cfg);
  if (sys.layout.num_spins() > 8) {
    throw ConfigError("validate: the oracle comparison is limited to 8 spins (got " +
                      std::to_string(sys.layout.num_spins()) + ")");
  }
  const ConfigSection s = cfg.section("validate");
  s.restrict_to({plain("times_grid"), quantity("times", Dim::kTime),
                 quantity("wahuha_tau", Dim::kTime), plain("wahuha_cycles")});
  const EngineSettings eng = engine_from_config(cfg, EngineKind::kTruncated);
  Table t;
  t.names = {"protocol", "points", "max_abs_deviation", "relative_l2"};
  json rep = json::array();
  auto record = [&](const std::string& name, const std::vector<double>& trunc,
                    const std::vector<double>& dense) {
    const double m = max_abs_dev(trunc, dense);
    const double r = rel_l2(trunc, dense);
    t.add_row({name, std::to_string(trunc.size()), format_number(m), format_number(r)});
    rep.push_back({{"protocol", name}, {"points", trunc.size()}, {"max_abs_deviation", m},
                   {"relative_l2", r}});
    summary[name] = m;
  };

  if (cfg.root["axy"]) {
    const ConfigSection a = cfg.section("axy");
    a.restrict_to(kAxyKeys);
    const auto freqs = grid_from_config(a, "frequencies", Dim::kFrequency);
    EngineSettings e = eng;
    e.kind = EngineKind::kTruncated;
    const Spectrum st = run_axy_spectrum(sys, freqs, axy_options(cfg, e, &pool));
    e.kind = EngineKind::kDense;
    const Spectrum sd = run_axy_spectrum(sys, freqs, axy_options(cfg, e, &pool));
    record("axy_spectrum", st.signal, sd.signal);
  }
  if (sys.num_nuclei() > 0) {
    std::vector<double> times;
    if (s.has("times_grid") || s.has_quantity("times", Dim::kTime)) {
      times = grid_from_config(s, "times", Dim::kTime);
    } else {
      for (int i = 0; i <= 10; ++i) times.push_back(20e-6 * i);
    }
    NuclearSequenceOptions o;
    o.truncation = eng.truncation;
    o.kernel = eng.kernel;
    o.taylor_order = eng.taylor_order;
    o.step_bound = eng.step_bound;
    o.pool = &pool;
    auto both = [&](const std::string& name, auto fn) {
      o.engine = EngineKind::kTruncated;
      const TimeTrace a = fn(o);
      o.engine = EngineKind::kDense;
      const TimeTrace b = fn(o);
      record(name, a.column("mean_z"), b.column("mean_z"));
    };
    both("ramsey", [&](const NuclearSequenceOptions& oo) { return run_ramsey(sys, times, oo); });
    both("hahn", [&](const NuclearSequenceOptions& oo) { return run_hahn(sys, times, oo); });
    const double tau = s.quantity("wahuha_tau", Dim::kTime, 5e-6);
    const std::size_t cycles = to_size(s.integer("wahuha_cycles", 10), "validate.wahuha_cycles");
    both("wahuha", [&](const NuclearSequenceOptions& oo) { return run_wahuha(sys, tau, cycles, oo); });
  }
  sink.csv(t);
  sink.report({{"n_spins", sys.layout.num_spins()}, {"comparisons", rep}});
}

void check_yaml_map(const YAML::Node& n, const std::string& what) {
  if (n && !n.IsMap()) throw ConfigError(what + ": expected a mapping");
}

}  // namespace

// ---------------------------------------------------------------------------------------------

HamiltonianOptions hamiltonian_from_config(const ConfigSection& s) {
  s.restrict_to({plain("dipolar"), quantity("dipolar_cutoff", Dim::kLength),
                 plain("include_dipolar"), plain("include_zeeman"), plain("include_hyperfine")});
  HamiltonianOptions o;
  const std::string mode = s.string("dipolar", "secular");
  if (mode == "secular") {
    o.dipolar_mode = DipolarMode::kSecularFlipFlop;
  } else if (mode == "full") {
    o.dipolar_mode = DipolarMode::kFull;
  } else {
    throw ConfigError(s.path() + ".dipolar: expected secular or full");
  }
  o.dipolar_cutoff_nm = s.quantity("dipolar_cutoff", Dim::kLength, -1.0);
  o.include_dipolar = s.boolean("include_dipolar", true);
  o.include_zeeman = s.boolean("include_zeeman", true);
  o.include_hyperfine = s.boolean("include_hyperfine", true);
  return o;
}

SpinSystem system_from_config(const ExperimentConfig& cfg) {
  const ConfigSection g = cfg.section("geometry");
  if (!g.defined()) throw ConfigError("geometry: required section missing");
  g.restrict_to({plain("kind"), plain("nx"), plain("ny"), plain("n_layers"), plain("n"),
                 plain("direction"), plain("file"), quantity("spacing", Dim::kLength),
                 quantity("distance", Dim::kLength), quantity("tilt", Dim::kAngle),
                 quantity("offset_x", Dim::kLength), quantity("offset_y", Dim::kLength),
                 quantity("position", Dim::kLength), quantity("field", Dim::kField),
                 quantity("uniform_j", Dim::kFrequency), plain("strong_nucleus")});
  const std::string kind = g.string("kind");
  const double field = g.quantity("field", Dim::kField, 0.0);
  SpinLayout layout;
  if (kind == "grid") {
    GridSpec spec;
    spec.nx = to_size(g.integer("nx"), "geometry.nx");
    spec.ny = to_size(g.integer("ny"), "geometry.ny");
    spec.n_layers = to_size(g.integer("n_layers", 1), "geometry.n_layers");
    spec.spacing_nm = g.quantity("spacing", Dim::kLength, spec.spacing_nm);
    spec.distance_nm = g.quantity("distance", Dim::kLength);
    spec.tilt_rad = g.quantity("tilt", Dim::kAngle, spec.tilt_rad);
    spec.offset_x_nm = g.quantity("offset_x", Dim::kLength, 0.0);
    spec.offset_y_nm = g.quantity("offset_y", Dim::kLength, 0.0);
    spec.field_T = field;
    layout = build_layer_grid(spec);
  } else if (kind == "chain") {
    Vec3 dir = Vec3::UnitX();
    if (g.has("direction")) dir = vec3_from(g.numbers("direction"), "geometry.direction");
    layout = build_chain(to_size(g.integer("n"), "geometry.n"),
                         g.quantity("spacing", Dim::kLength, constants::kCarbonNearestNeighborNm),
                         g.quantity("distance", Dim::kLength), dir, field);
  } else if (kind == "single") {
    layout.field_magnitude = field;
    layout.nuclear_positions.push_back(
        vec3_from(g.quantities("position", Dim::kLength), "geometry.position"));
    layout.validate();
  } else if (kind == "table") {
    fs::path file = g.string("file");
    if (file.is_relative()) file = config_dir(cfg) / file;
    layout = layout_from_table(read_file(file));
    if (g.has_quantity("field", Dim::kField)) layout.field_magnitude = field;
    layout.validate();
  } else {
    throw ConfigError("geometry.kind: expected grid, chain, single, or table (got '" + kind + "')");
  }
  SpinSystem sys = SpinSystem::from_layout(std::move(layout), hamiltonian_from_config(cfg.section("hamiltonian")));
  if (g.has_quantity("uniform_j", Dim::kFrequency)) {
    set_uniform_nearest_neighbor(sys, constants::kTwoPi * g.quantity("uniform_j", Dim::kFrequency));
  }
  const ConfigSection sn = g.child("strong_nucleus");
  if (sn.defined()) {
    sn.restrict_to({quantity("position", Dim::kLength), quantity("a_zx", Dim::kFrequency),
                    quantity("a_zy", Dim::kFrequency), quantity("a_zz", Dim::kFrequency),
                    quantity("j", Dim::kFrequency), plain("partner")});
    Hyperfine a;
    a.zx = constants::kTwoPi * sn.quantity("a_zx", Dim::kFrequency, 0.0);
    a.zy = constants::kTwoPi * sn.quantity("a_zy", Dim::kFrequency, 0.0);
    a.zz = constants::kTwoPi * sn.quantity("a_zz", Dim::kFrequency, 0.0);
    const std::size_t partner = to_size(sn.integer("partner", 0), "geometry.strong_nucleus.partner");
    Vec3 pos;
    if (sn.has_quantity("position", Dim::kLength)) {
      pos = vec3_from(sn.quantities("position", Dim::kLength), "geometry.strong_nucleus.position");
    } else {
      // One spacing beyond the partner, continuing away from its nearest neighbour.
      const auto& p = sys.layout.nuclear_positions;
      if (p.size() < 2 || partner >= p.size()) {
        throw ConfigError("geometry.strong_nucleus.position: required unless the partner has a neighbour");
      }
      std::size_t nb = partner == 0 ? 1 : partner - 1;
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (k != partner && (p[k] - p[partner]).norm() < (p[nb] - p[partner]).norm()) nb = k;
      }
      pos = p[partner] + (p[partner] - p[nb]);
    }
    add_strong_nucleus(sys, pos, a, constants::kTwoPi * sn.quantity("j", Dim::kFrequency, 0.0), partner);
  }
  return sys;
}

std::optional<DephasingModel> dephasing_from_config(const ConfigSection& s, std::uint64_t seed) {
  if (!s.defined()) return std::nullopt;
  s.restrict_to({quantity("T2", Dim::kTime), plain("law"), plain("n_samples"),
                 plain("common_mode"), plain("record_draws")});
  DephasingModel m;
  m.T2_s = s.quantity("T2", Dim::kTime);
  if (!(m.T2_s > 0.0)) throw ConfigError(s.path() + ".T2: must be positive");
  m.law = parse_sampling_law(s.string("law", "normal"));
  m.n_samples = to_size(s.integer("n_samples", 2000), s.path() + ".n_samples");
  if (m.n_samples == 0) throw ConfigError(s.path() + ".n_samples: must be positive");
  m.common_mode = s.boolean("common_mode", false);
  m.record_draws = s.boolean("record_draws", false);
  m.seed = seed;
  return m;
}

std::vector<double> grid_from_config(const ConfigSection& s, const std::string& name, Dim d) {
  const bool listed = s.has_quantity(name, d);
  const bool gridded = s.has(name + "_grid");
  if (listed == gridded) {
    throw ConfigError(s.path() + "." + name + ": give exactly one of " + name + "_<unit> or " +
                      name + "_grid");
  }
  if (listed) return s.quantities(name, d);
  const ConfigSection g = s.child(name + "_grid");
  g.restrict_to({quantity("start", d), quantity("stop", d), plain("count")});
  const double a = g.quantity("start", d);
  const double b = g.quantity("stop", d);
  const std::size_t n = to_size(g.integer("count"), g.path() + ".count");
  if (n == 0) throw ConfigError(g.path() + ".count: must be positive");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

EngineSettings engine_from_config(const ExperimentConfig& cfg, EngineKind default_kind) {
  EngineSettings e;
  e.kind = default_kind;
  e.cache_dir = TableCache::default_dir();
  const YAML::Node n = cfg.root["engine"];
  if (!n || n.IsNull()) return e;
  if (n.IsScalar()) {
    e.kind = parse_engine(n.as<std::string>());
    return e;
  }
  check_yaml_map(n, "engine");
  const ConfigSection s(n, "engine");
  s.restrict_to({plain("kind"), plain("kernel"), plain("max_nuclear_weight"),
                 quantity("triple_radius", Dim::kLength), plain("lane_batch"),
                 plain("taylor_order"), plain("step_bound"),
                 plain("max_dense_spins"), plain("cache"), plain("cache_dir")});
  if (s.has("kind")) e.kind = parse_engine(s.string("kind"));
  e.kernel = parse_kernel(s.string("kernel", "auto"));
  e.truncation.max_nuclear_weight = to_size(s.integer("max_nuclear_weight", 2), "engine.max_nuclear_weight");
  e.truncation.nuclear_triple_radius_nm = s.quantity("triple_radius", Dim::kLength, 0.0);
  e.taylor_order = static_cast<int>(s.integer("taylor_order", e.taylor_order));
  e.step_bound = s.number("step_bound", e.step_bound);
  e.lane_batch = to_size(s.integer("lane_batch", 32), "engine.lane_batch");
  if (e.lane_batch == 0) throw ConfigError("engine.lane_batch: must be positive");
  e.max_dense_spins = to_size(s.integer("max_dense_spins", kDefaultMaxDenseSpins), "engine.max_dense_spins");
  e.use_cache = s.boolean("cache", false);
  if (s.has("cache_dir")) {
    fs::path d = s.string("cache_dir");
    e.cache_dir = d.is_relative() ? config_dir(cfg) / d : d;
  }
  return e;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t threads = cfg.threads ? cfg.threads : ThreadPool::default_threads();
  ThreadPool pool(threads);
  Sink sink{cfg, {}, json::array()};
  json summary = json::object();
  const std::string& p = cfg.protocol;
  if (p == "axy_spectrum") {
    run_axy(cfg, pool, sink, summary);
  } else if (p == "novel") {
    run_novel_protocol(cfg, sink, summary);
  } else if (p == "ramsey" || p == "hahn" || p == "wahuha") {
    run_sequence(cfg, pool, sink, summary);
  } else if (p == "dtc") {
    run_dtc_protocol(cfg, pool, sink, summary);
  } else if (p == "dtc_sweep") {
    run_dtc_sweep(cfg, pool, sink, summary);
  } else if (p == "distance_table") {
    run_distance_table(cfg, sink, summary);
  } else if (p == "validate") {
    run_validate(cfg, pool, sink, summary);
  } else {
    throw ConfigError("protocol: unknown protocol '" + p + "'");
  }
  RunManifest m;
  m.run_id = cfg.run_id();
  m.protocol = p;
  m.config_path = cfg.source.string();
  m.config_echo = cfg.canonical;
  m.seed = cfg.seed;
  m.threads = threads;
  for (const auto& o : sink.outputs) m.outputs.push_back(o.filename().string());
  m.cache = sink.cache;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.timestamp = utc_timestamp();
  RunResult r;
  r.manifest = sink.path(".manifest.json");
  atomic_write(r.manifest, manifest_json(m).dump(2) + "\n");
  r.outputs = sink.outputs;
  r.outputs.push_back(r.manifest);
  r.summary = summary;
  return r;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const YAML::Exception*>(&e)) return 2;
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return 1;
  switch (err->kind()) {
    case ErrorKind::kConfiguration:
    case ErrorKind::kGeometry:
      return 2;
    case ErrorKind::kCapacity:
      return 3;
    case ErrorKind::kFit:
      return 4;
    default:
      return 1;
  }
}

std::string describe_error(const std::exception& e) {
  std::string msg;
  switch (exit_code_for(e)) {
    case 2: msg = "config error: "; break;
    case 3: msg = "capacity error: "; break;
    case 4: msg = "fit failure: "; break;
    default: msg = "error: "; break;
  }
  msg += e.what();
  if (const auto* c = dynamic_cast<const CapacityError*>(&e)) {
    msg += " (requested " + std::to_string(c->requested()) +
           "). Use engine: truncated for large systems, lower engine.max_nuclear_weight, or "
           "reduce the number of nuclei; dense runs above 12 spins need engine.max_dense_spins "
           "and 16 * 4^n bytes per density matrix.";
  }
  return msg;
}

namespace {

struct CacheTarget {
  TableCache cache;
  SpinSystem sys;
  TruncationRule rule;
};

CacheTarget cache_target(const ExperimentConfig& cfg) {
  const EngineSettings e = engine_from_config(cfg, EngineKind::kTruncated);
  return {TableCache(e.cache_dir), system_from_config(cfg), e.truncation};
}

json entry_json(const TableCache::Entry& e) {
  char b[17], h[17];
  std::snprintf(b, sizeof(b), "%016llx", static_cast<unsigned long long>(e.basis_hash));
  std::snprintf(h, sizeof(h), "%016llx", static_cast<unsigned long long>(e.hamiltonian_hash));
  return {{"path", e.path.string()}, {"basis_hash", b},      {"hamiltonian_hash", h},
          {"code_version", e.code_version}, {"dim", e.dim}, {"nnz", e.nnz},
          {"bytes", e.bytes},         {"valid", e.valid},    {"problem", e.problem}};
}

}  // namespace

nlohmann::json cache_build(const ExperimentConfig& cfg) {
  const CacheTarget t = cache_target(cfg);
  if (t.sys.num_nuclei() == 0) throw ConfigError("cache build: geometry has no nuclei");
  const TruncatedBasis basis = TruncatedBasis::enumerate(t.sys.num_nuclei(), t.rule, &t.sys.layout);
  const HamiltonianTerms h = build_secular_hamiltonian(t.sys.layout, t.sys.couplings, t.sys.hamiltonian);
  ThreadPool pool(cfg.threads ? cfg.threads : ThreadPool::default_threads());
  bool rebuilt = false;
  std::string reason;
  const ActionTable a = t.cache.load_or_build(h, basis, TableLayout::kByTarget, &pool, &rebuilt, &reason);
  json j = cache_entry_json(t.cache, basis.hash(), h.hash(), TableLayout::kByTarget, !rebuilt);
  j["built"] = rebuilt;
  if (rebuilt) j["reason"] = reason;
  j["dim"] = a.dim();
  j["nnz"] = a.nnz();
  return j;
}

nlohmann::json cache_list(const ExperimentConfig& cfg) {
  const EngineSettings e = engine_from_config(cfg, EngineKind::kTruncated);
  json a = json::array();
  for (const auto& entry : TableCache(e.cache_dir).list()) a.push_back(entry_json(entry));
  return {{"dir", e.cache_dir.string()}, {"entries", a}};
}

nlohmann::json cache_purge(const ExperimentConfig& cfg) {
  const EngineSettings e = engine_from_config(cfg, EngineKind::kTruncated);
  return {{"dir", e.cache_dir.string()}, {"removed", TableCache(e.cache_dir).purge()}};
}

}  // namespace nvlayer
