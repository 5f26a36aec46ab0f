// Copyright 2026 The lsft Authors
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

// lsft: batch front end over the lsft headers. Results go to stdout; with
// --out DIR they are also written there next to a manifest.json.

#include "lsft/lsft.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lsft;

namespace {

constexpr const char *kVersion = "1.0.0";

struct Common {
  int sites = 3;
  int qubits = 2;
  double mass = 0.3;
  double phi_max = 3.5;
  double coupling = 0.0;
  std::string boundary = "periodic";
  std::string stencil = "s1";
  std::string out;
  std::string format = "json";
  std::size_t budget = kDefaultAmplitudeBudget;
  std::string state_path;
};

struct Options {
  std::string decomposition = "full";
  std::optional<int> h_max;
  std::optional<double> tau;
  int r_max = 0;
  int fit_lo = 0;
  int fit_hi = 0;
  std::vector<int> h_values;
  std::vector<double> tau_values;
  std::string model = "powerexp";
  double power = 1.5;
  std::string pi_mode = "spectral";
  // Envelopes at large distance need the state converged to roundoff.
  double tolerance = 1e-13;
  int max_iterations = 500;
  int restart = 120;
  std::string target;
};

LatticeSpec make_spec(const Common &c) {
  LatticeSpec s;
  s.n_sites = c.sites;
  s.qubits_per_site = c.qubits;
  s.mass = c.mass;
  s.phi_max = c.phi_max;
  s.coupling = c.coupling;
  s.boundary = boundary_from_string(c.boundary);
  s.stencil = stencil_from_string(c.stencil);
  s.validate();
  return s;
}

json common_config(const Common &c) {
  return {{"sites", c.sites},       {"qubits", c.qubits},     {"mass", c.mass},
          {"phimax", c.phi_max},    {"coupling", c.coupling}, {"boundary", c.boundary},
          {"stencil", c.stencil},   {"format", c.format},     {"budget", c.budget},
          {"state", c.state_path}};
}

json fit_json(const std::optional<FitResult> &f) { return f ? to_json(*f) : json(nullptr); }

Decomposition parse_decomposition(const std::string &name, int qubits) {
  if (name == "full") {
    return Decomposition::full();
  }
  if (name == "sitewise" || name == "site-wise") {
    return Decomposition::site_wise(qubits);
  }
  throw ValidationError("unknown decomposition '" + name + "' (full|sitewise)");
}

/// One run: collects the payload and writes the optional output directory.
class Run {
public:
  Run(std::string command, const Common &common, json config)
      : command_(std::move(command)), common_(common), config_(std::move(config)) {}

  void set_spec(const LatticeSpec &spec) { spec_ = spec; }
  void add_spec(const std::string &key, const LatticeSpec &spec) {
    extra_specs_[key] = {{"spec", to_json(spec)}, {"spec_hash", spec_hash(spec)}};
  }

  json manifest() const {
    json m = {{"tool", "lsft"},
              {"version", kVersion},
              {"command", command_},
              {"config", config_},
              {"basis_order", kBasisOrder},
              {"angle_convention", kAngleConvention},
              {"fidelity_convention", "squared_overlap"}};
    if (spec_) {
      m["spec"] = to_json(*spec_);
      m["spec_hash"] = spec_hash(*spec_);
    }
    if (!extra_specs_.empty()) {
      m["specs"] = extra_specs_;
    }
    m["outputs"] = outputs_;
    return m;
  }

  std::string hash() const { return spec_ ? spec_hash(*spec_) : std::string(); }

  void register_file(const std::string &name) { outputs_.push_back(name); }

  fs::path out_dir() const { return common_.out; }
  bool has_out() const { return !common_.out.empty(); }

  /// JSON payloads carry the manifest inline.
  void finish_json(json payload) {
    const std::string file = command_ + ".json";
    if (has_out()) {
      register_file(file);
    }
    payload["manifest"] = manifest();
    emit(file, payload.dump(2) + "\n");
  }

  /// CSV payloads lead with a spec_hash comment line.
  void finish_csv(const std::string &csv) {
    const std::string file = command_ + ".csv";
    if (has_out()) {
      register_file(file);
    }
    emit(file, "# spec_hash=" + hash() + "\n" + csv);
  }

  void finish_text(const std::string &text, const std::string &ext) {
    const std::string file = command_ + "." + ext;
    if (has_out()) {
      register_file(file);
    }
    emit(file, text);
  }

private:
  void emit(const std::string &file, const std::string &content) {
    std::cout << content;
    if (!has_out()) {
      return;
    }
    fs::create_directories(out_dir());
    write_file(out_dir() / file, content);
    write_file(out_dir() / "manifest.json", manifest().dump(2) + "\n");
  }

  static void write_file(const fs::path &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      throw ValidationError("cannot write '" + path.string() + "'");
    }
    f << content;
  }

  std::string command_;
  Common common_;
  json config_;
  std::optional<LatticeSpec> spec_;
  json extra_specs_ = json::object();
  std::vector<std::string> outputs_;
};

StateVector input_state(const Common &c, const LatticeSpec &spec) {
  if (!c.state_path.empty()) {
    return load_state(c.state_path);
  }
  return ground_state(build_kernel(spec), make_grid(spec), c.budget);
}

json matrix_json(const Matrix &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row[j] = m(i, j);
    }
    rows.push_back(row);
  }
  return rows;
}

json envelope_json(const std::map<int, double> &env) {
  json rows = json::array();
  for (const auto &[r, v] : env) {
    rows.push_back({{"r", r}, {"max_abs_alpha", v}});
  }
  return rows;
}

json sweep_json(const std::vector<CorrelationSweepRow> &rows) {
  json out = json::array();
  for (const auto &r : rows) {
    out.push_back({{"r", r.r},
                   {"two_point", r.two_point},
                   {"k_entry", r.k_entry},
                   {"mutual_information", r.mutual_information},
                   {"negativity_s1", r.negativity_s1},
                   {"negativity_s3", r.negativity_s3}});
  }
  return out;
}

json scan_json(const std::vector<FidelityScanRow> &rows) {
  json out = json::array();
  for (const auto &r : rows) {
    out.push_back({{"h_trunc", r.h_max},
                   {"tau", r.tau},
                   {"retained_rotations", r.retained},
                   {"fidelity", r.fidelity_alpha},
                   {"fidelity_theta_same_count", r.fidelity_theta}});
  }
  return out;
}

std::string angles_csv(const ThetaSchedule &t, const std::optional<AlphaSchedule> &a) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,level,h,k,angle\n";
  for (int l = 0; l < t.n_qubits; ++l) {
    for (std::size_t k = 0; k < t.levels[l].size(); ++k) {
      out << "theta," << l << ',' << l << ',' << k << ',' << t.levels[l][k] << '\n';
    }
  }
  if (a) {
    for (int l = 0; l < a->n_qubits; ++l) {
      for (const auto &[h, block] : a->levels[l]) {
        for (std::size_t k = 0; k < block.size(); ++k) {
          out << "alpha," << l << ',' << h << ',' << k << ',' << block[k] << '\n';
        }
      }
    }
  }
  return out.str();
}

json decimal_schedule(const ThetaSchedule &t) {
  json levels = json::array();
  for (const auto &l : t.levels) {
    levels.push_back(l);
  }
  return levels;
}

json decimal_schedule(const AlphaSchedule &a) {
  json levels = json::array();
  for (const auto &l : a.levels) {
    json blocks = json::object();
    for (const auto &[h, block] : l) {
      blocks[std::to_string(h)] = block;
    }
    levels.push_back(blocks);
  }
  return levels;
}

void require_format(const Common &c, std::initializer_list<const char *> allowed) {
  for (const char *f : allowed) {
    if (c.format == f) {
      return;
    }
  }
  throw ValidationError("format '" + c.format + "' is not available for this command");
}

// ---- subcommands --------------------------------------------------------

void cmd_kmatrix(const Common &c, const Options &) {
  require_format(c, {"json", "csv"});
  const LatticeSpec spec = make_spec(c);
  Run run("kmatrix", c, common_config(c));
  run.set_spec(spec);
  const CorrelationKernel k = build_kernel(spec);
  if (c.format == "csv") {
    std::ostringstream out;
    out.precision(17);
    out << "i,j,K\n";
    for (int i = 0; i < k.size(); ++i) {
      for (int j = 0; j < k.size(); ++j) {
        out << i << ',' << j << ',' << k.k_matrix(i, j) << '\n';
      }
    }
    run.finish_csv(out.str());
    return;
  }
  json j = kernel_to_json(k);
  j["k_rows"] = matrix_json(k.k_matrix);
  j["covariance_rows"] = matrix_json(k.covariance());
  run.finish_json(j);
}

void cmd_correlations(const Common &c, const Options &o) {
  require_format(c, {"json", "csv"});
  const LatticeSpec spec = make_spec(c);
  const int r_max = o.r_max > 0 ? o.r_max : spec.n_sites / 2;
  const int lo = o.fit_lo > 0 ? o.fit_lo : 1;
  const int hi = o.fit_hi > 0 ? o.fit_hi : r_max;
  json cfg = common_config(c);
  cfg.update({{"rmax", r_max}, {"fit_lo", lo}, {"fit_hi", hi}});
  Run run("correlations", c, cfg);
  run.set_spec(spec);
  const DecaySweep d = decay_sweep(spec, r_max, lo, hi);
  if (c.format == "csv") {
    run.finish_csv(correlation_sweep_csv(d.rows));
    return;
  }
  run.finish_json({{"rows", sweep_json(d.rows)},
                   {"fit_k", fit_json(d.fit_k)},
                   {"fit_two_point", fit_json(d.fit_two_point)},
                   {"fit_mutual_information", fit_json(d.fit_mutual_information)}});
}

void cmd_groundstate(const Common &c, const Options &) {
  require_format(c, {"json"});
  const LatticeSpec spec = make_spec(c);
  if (c.out.empty()) {
    throw ValidationError("groundstate writes a binary state file and needs --out");
  }
  Run run("groundstate", c, common_config(c));
  run.set_spec(spec);
  const StateVector psi = ground_state(build_kernel(spec), make_grid(spec), c.budget);
  fs::create_directories(c.out);
  save_state(psi, (fs::path(c.out) / "groundstate.bin").string());
  run.register_file("groundstate.bin");
  run.register_file("groundstate.bin.json");
  run.finish_json({{"state", state_metadata(psi)}});
}

void cmd_angles(const Common &c, const Options &o) {
  require_format(c, {"json", "csv"});
  const LatticeSpec given = c.state_path.empty() ? make_spec(c) : LatticeSpec{};
  const StateVector psi = input_state(c, given);
  json cfg = common_config(c);
  cfg["decomposition"] = o.decomposition;
  Run run("angles", c, cfg);
  run.set_spec(psi.spec);
  const ThetaSchedule theta = thetas_from_state(psi);
  std::optional<AlphaSchedule> alpha;
  if (o.decomposition != "theta") {
    alpha = alphas_from_thetas(theta, parse_decomposition(o.decomposition, psi.spec.qubits_per_site));
  }
  if (c.format == "csv") {
    run.finish_csv(angles_csv(theta, alpha));
    return;
  }
  json j = {{"theta", schedule_to_json(theta)}};
  if (alpha) {
    j["alpha"] = schedule_to_json(*alpha);
    j["alpha_rotations"] = alpha_count(*alpha, true);
  }
  run.finish_json(j);
}

TruncationPolicy policy_from(const Options &o) {
  TruncationPolicy p;
  p.h_max = o.h_max;
  p.tau = o.tau;
  p.validate();
  return p;
}

json policy_config(const TruncationPolicy &p) {
  return {{"hmax", p.h_max ? json(*p.h_max) : json(nullptr)},
          {"tau", p.tau ? json(*p.tau) : json(nullptr)},
          {"ordering", "by_distance_then_magnitude"}};
}

void cmd_truncate(const Common &c, const Options &o) {
  require_format(c, {"json"});
  const TruncationPolicy policy = policy_from(o);
  const LatticeSpec given = c.state_path.empty() ? make_spec(c) : LatticeSpec{};
  const StateVector psi = input_state(c, given);
  json cfg = common_config(c);
  cfg["decomposition"] = o.decomposition;
  cfg["policy"] = policy_config(policy);
  Run run("truncate", c, cfg);
  run.set_spec(psi.spec);
  const ThetaSchedule theta = thetas_from_state(psi);
  const AlphaSchedule alphas =
      alphas_from_thetas(theta, parse_decomposition(o.decomposition, psi.spec.qubits_per_site));
  const auto cut = truncate(alphas, policy);
  const double f = fidelity(psi.amplitudes, state_from_thetas(thetas_from_alphas(cut.schedule)));
  const double ft = fidelity(psi.amplitudes,
                             state_from_thetas(truncate_to_count(theta, cut.retained).schedule));
  run.finish_json({{"retained_rotations", cut.retained},
                   {"zeroed_rotations", cut.zeroed},
                   {"fidelity", f},
                   {"infidelity", 1.0 - f},
                   {"fidelity_theta_same_count", ft}});
}

void cmd_fidelity_scan(const Common &c, const Options &o) {
  require_format(c, {"json", "csv"});
  const LatticeSpec given = c.state_path.empty() ? make_spec(c) : LatticeSpec{};
  const StateVector psi = input_state(c, given);
  std::vector<int> hs = o.h_values;
  if (hs.empty()) {
    for (int h = 0; h < psi.spec.n_qubits(); ++h) {
      hs.push_back(h);
    }
  }
  const std::vector<double> taus = o.tau_values.empty() ? std::vector<double>{0.0} : o.tau_values;
  json cfg = common_config(c);
  cfg.update({{"decomposition", o.decomposition}, {"hvalues", hs}, {"taus", taus}});
  if (o.fit_hi > 0) {
    cfg.update({{"fit_lo", o.fit_lo}, {"fit_hi", o.fit_hi}});
  }
  Run run("fidelity-scan", c, cfg);
  run.set_spec(psi.spec);
  const auto rows = fidelity_scan(
      psi.amplitudes, parse_decomposition(o.decomposition, psi.spec.qubits_per_site), hs, taus);
  if (c.format == "csv") {
    run.finish_csv(fidelity_scan_csv(rows));
    return;
  }
  json j = {{"rows", scan_json(rows)}};
  if (o.fit_hi > 0) {
    const int step = psi.spec.qubits_per_site;
    json fits = json::object();
    for (auto [name, method] : {std::pair{"direct", FitMethod::Direct},
                                std::pair{"log_linear", FitMethod::LogLinear}}) {
      try {
        fits[name] = to_json(infidelity_fit(rows, taus.front(), o.fit_lo, o.fit_hi, step, method));
      } catch (const ValidationError &e) {
        fits[name] = {{"error", e.what()}};
      }
    }
    j["infidelity_fit"] = fits;
  }
  run.finish_json(j);
}

FitModel parse_model(const std::string &m) {
  if (m == "powerexp") {
    return FitModel::PowerExp;
  }
  if (m == "bessel") {
    return FitModel::BesselEnvelope;
  }
  if (m == "pureexp") {
    return FitModel::PureExp;
  }
  throw ValidationError("unknown fit model '" + m + "' (powerexp|bessel|pureexp)");
}

void cmd_envelope(const Common &c, const Options &o) {
  require_format(c, {"json", "csv"});
  const LatticeSpec given = c.state_path.empty() ? make_spec(c) : LatticeSpec{};
  const StateVector psi = input_state(c, given);
  const LatticeSpec &spec = psi.spec;
  const int lo = o.fit_lo > 0 ? o.fit_lo : 1;
  const int hi = o.fit_hi > 0 ? o.fit_hi : spec.n_sites - 1;
  json cfg = common_config(c);
  cfg.update({{"decomposition", o.decomposition},
              {"model", o.model},
              {"power", o.power},
              {"fit_lo", lo},
              {"fit_hi", hi}});
  Run run("envelope", c, cfg);
  run.set_spec(spec);
  const auto alphas = alphas_from_thetas(thetas_from_state(psi),
                                         parse_decomposition(o.decomposition, spec.qubits_per_site));
  const auto env = max_alpha_by_distance(alphas, spec.qubits_per_site);
  if (c.format == "csv") {
    run.finish_csv(envelope_csv(env));
    return;
  }
  FitOptions opt;
  opt.power = o.power;
  const FitModel model = parse_model(o.model);
  json j = {{"envelope", envelope_json(env)},
            {"fit_alpha", to_json(fit(model, to_points(env, lo, hi), opt))}};
  if (spec.coupling == 0.0) {
    const CorrelationKernel k = build_kernel(spec);
    std::map<int, double> row;
    for (int r = 1; r < spec.n_sites; ++r) {
      row[r] = std::abs(k.k_matrix(0, r));
    }
    j["k_row"] = envelope_json(row);
    j["fit_k"] = to_json(fit(model, to_points(row, lo, hi), opt));
  }
  run.finish_json(j);
}

json decay_json(const StateDecay &d) {
  return {{"envelope", envelope_json(d.envelope)},
          {"two_point_row", d.two_point},
          {"inverse_row", d.inverse},
          {"fit_alpha", fit_json(d.alpha)},
          {"fit_two_point", fit_json(d.two_point_fit)},
          {"fit_inverse", fit_json(d.inverse_fit)}};
}

json interacting_run(const LatticeSpec &spec, const Options &o, std::size_t budget,
                     const std::string &state_out) {
  LanczosOptions lo;
  lo.tolerance = o.tolerance;
  lo.max_iterations = o.max_iterations;
  lo.restart_size = o.restart;
  const PiMode mode = pi_mode_from_string(o.pi_mode);
  const SparseHamiltonian h(spec, mode, budget);
  const SpectrumResult r = solve_spectrum(h, lo);
  if (!state_out.empty()) {
    save_state(r.ground_state, state_out);
  }
  const InteractingObservables obs = interacting_observables(r.ground_state);
  const int hi = o.fit_hi > 0 ? o.fit_hi : spec.n_sites - 1;
  const int lo_r = o.fit_lo > 0 ? o.fit_lo : 1;
  json decay;
  try {
    decay = decay_json(state_decay(r.ground_state, lo_r, hi));
  } catch (const ValidationError &e) {
    // Sign changes in the ground state leave the angles undefined.
    decay = {{"error", e.what()}};
  }
  return {{"spectrum", spectrum_manifest(r, mode)},
          {"correlation", matrix_json(obs.correlation)},
          {"inverse_correlation", matrix_json(obs.inverse)},
          {"decay", decay}};
}

void cmd_interacting(const Common &c, const Options &o, bool boundary_given) {
  require_format(c, {"json"});
  Common cc = c;
  if (!boundary_given) {
    cc.boundary = "open";
  }
  const LatticeSpec spec = make_spec(cc);
  json cfg = common_config(cc);
  cfg.update({{"pi", o.pi_mode},
              {"tolerance", o.tolerance},
              {"max_iterations", o.max_iterations},
              {"restart", o.restart}});
  Run run("interacting", cc, cfg);
  run.set_spec(spec);
  std::string state_out;
  if (run.has_out()) {
    fs::create_directories(c.out);
    state_out = (fs::path(c.out) / "interacting_ground.bin").string();
    run.register_file("interacting_ground.bin");
    run.register_file("interacting_ground.bin.json");
  }
  run.finish_json(interacting_run(spec, o, c.budget, state_out));
}

void cmd_emit(const Common &c, const Options &o) {
  require_format(c, {"text", "qasm"});
  const LatticeSpec given = c.state_path.empty() ? make_spec(c) : LatticeSpec{};
  const StateVector psi = input_state(c, given);
  json cfg = common_config(c);
  cfg["decomposition"] = o.decomposition;
  Run run("emit", c, cfg);
  run.set_spec(psi.spec);
  const std::string hash = spec_hash(psi.spec);
  const ThetaSchedule theta = thetas_from_state(psi);
  const bool truncating = o.h_max || o.tau;
  CircuitIR ir;
  if (o.decomposition == "theta") {
    ir = emit(truncating ? truncate(theta, policy_from(o)).schedule : theta, hash);
  } else {
    AlphaSchedule a =
        alphas_from_thetas(theta, parse_decomposition(o.decomposition, psi.spec.qubits_per_site));
    ir = emit(truncating ? truncate(a, policy_from(o)).schedule : a, hash);
  }
  if (c.format == "qasm") {
    run.finish_text(render_qasm(ir), "qasm");
  } else {
    run.finish_text(render_text(ir), "txt");
  }
}

// ---- reproduce ----------------------------------------------------------

LatticeSpec pinned(int n, int nq, double m, double phi_max, Boundary b, double lambda = 0.0) {
  LatticeSpec s;
  s.n_sites = n;
  s.qubits_per_site = nq;
  s.mass = m;
  s.phi_max = phi_max;
  s.boundary = b;
  s.coupling = lambda;
  s.validate();
  return s;
}

StateVector free_ground(const LatticeSpec &spec, std::size_t budget) {
  return ground_state(build_kernel(spec), make_grid(spec), budget);
}

json reproduce_table1(Run &run, std::size_t budget) {
  const LatticeSpec spec = pinned(3, 2, 0.3, 3.5, Boundary::Open);
  run.set_spec(spec);
  const ThetaSchedule theta = thetas_from_state(free_ground(spec, budget));
  const AlphaSchedule alpha = alphas_from_thetas(theta, Decomposition::site_wise(2));
  return {{"theta", decimal_schedule(theta)}, {"alpha_sitewise", decimal_schedule(alpha)}};
}

json reproduce_kmatrix(Run &run) {
  const LatticeSpec spec = pinned(3, 2, 0.3, 3.5, Boundary::Open);
  run.set_spec(spec);
  const CorrelationKernel k = build_kernel(spec);
  return {{"k_rows", matrix_json(k.k_matrix)}};
}

json reproduce_fig1(Run &run) {
  const LatticeSpec spec = pinned(80, 2, 0.3, 3.5, Boundary::Periodic);
  run.set_spec(spec);
  const DecaySweep d = decay_sweep(spec, 40, 15, 30);
  json j = {{"rows", sweep_json(d.rows)},
            {"fit_k", fit_json(d.fit_k)},
            {"fit_two_point", fit_json(d.fit_two_point)},
            {"fit_mutual_information", fit_json(d.fit_mutual_information)}};
  if (d.fit_two_point && d.fit_mutual_information) {
    j["mi_over_two_point_rate"] = d.fit_mutual_information->rate / d.fit_two_point->rate;
  }
  return j;
}

json reproduce_fig2(Run &run, std::size_t budget) {
  const LatticeSpec spec = pinned(10, 2, 0.3, 3.5, Boundary::Open);
  run.set_spec(spec);
  const ThetaSchedule theta = thetas_from_state(free_ground(spec, budget));
  std::map<int, double> theta_max;
  for (int l = 0; l < theta.n_qubits; ++l) {
    double m = 0.0;
    for (double t : theta.levels[l]) {
      m = std::max(m, std::abs(t));
    }
    theta_max[l] = m;
  }
  const auto alphas = alphas_from_thetas(theta, Decomposition::full());
  const auto env = max_alpha_by_distance(alphas, 2);
  const auto pts = to_points(env, 1, spec.n_sites - 1);
  json by_h = json::array();
  for (const auto &[h, v] : theta_max) {
    by_h.push_back({{"h", h}, {"max_abs_theta", v}});
  }
  return {{"theta_by_h", by_h},
          {"envelope", envelope_json(env)},
          {"fit_bessel", to_json(fit(FitModel::BesselEnvelope, pts))},
          {"fit_powerexp", to_json(fit(FitModel::PowerExp, pts))}};
}

json reproduce_fig4(Run &run, std::size_t budget) {
  const LatticeSpec spec = pinned(4, 2, 0.3, 3.5, Boundary::Open);
  run.set_spec(spec);
  const StateVector psi = free_ground(spec, budget);
  std::vector<int> hs;
  for (int h = 0; h < spec.n_qubits(); ++h) {
    hs.push_back(h);
  }
  const auto rows =
      fidelity_scan(psi.amplitudes, Decomposition::full(), hs, {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1});
  return {{"rows", scan_json(rows)}};
}

json reproduce_fig5(Run &run, std::size_t budget) {
  const LatticeSpec spec = pinned(10, 2, 0.3, 3.5, Boundary::Open);
  run.set_spec(spec);
  const StateVector psi = free_ground(spec, budget);
  const auto rows =
      fidelity_scan(psi.amplitudes, Decomposition::full(), {2, 4, 6, 8, 10, 12, 14, 16, 18}, {0.0});
  return {{"rows", scan_json(rows)},
          {"fit_direct", to_json(infidelity_fit(rows, 0.0, 4, 14, 2, FitMethod::Direct))},
          {"fit_log_linear", to_json(infidelity_fit(rows, 0.0, 4, 14, 2, FitMethod::LogLinear))}};
}

json reproduce_fig6(Run &run, std::size_t budget) {
  const LatticeSpec free_spec = pinned(8, 2, 1.6, 1.7, Boundary::Open);
  const LatticeSpec int_spec = pinned(8, 2, 1.6, 1.3, Boundary::Open, 32.0);
  run.set_spec(int_spec);
  run.add_spec("free", free_spec);
  run.add_spec("interacting", int_spec);
  const CorrelationKernel k = build_kernel(free_spec);
  std::map<int, double> k_row;
  for (int r = 1; r < 8; ++r) {
    k_row[r] = std::abs(k.k_matrix(0, r));
  }
  json free = decay_json(state_decay(free_ground(free_spec, budget), 1, 7));
  free["fit_k"] = to_json(fit(FitModel::PowerExp, to_points(k_row, 1, 7)));
  Options o;
  return {{"free", free}, {"interacting", interacting_run(int_spec, o, budget, "")}};
}

void cmd_reproduce(const Common &c, const Options &o) {
  require_format(c, {"json"});
  json cfg = {{"target", o.target}, {"budget", c.budget}};
  Run run("reproduce-" + o.target, c, cfg);
  json j;
  if (o.target == "table1") {
    j = reproduce_table1(run, c.budget);
  } else if (o.target == "appendixF-K") {
    j = reproduce_kmatrix(run);
  } else if (o.target == "fig1") {
    j = reproduce_fig1(run);
  } else if (o.target == "fig2") {
    j = reproduce_fig2(run, c.budget);
  } else if (o.target == "fig4") {
    j = reproduce_fig4(run, c.budget);
  } else if (o.target == "fig5") {
    j = reproduce_fig5(run, c.budget);
  } else if (o.target == "fig6") {
    j = reproduce_fig6(run, c.budget);
  } else {
    throw ValidationError("unknown reproduce target '" + o.target + "'");
  }
  run.finish_json(j);
}

void add_common(CLI::App *sub, Common &c, bool with_state) {
  sub->add_option("--sites", c.sites, "lattice sites N");
  sub->add_option("--qubits", c.qubits, "qubits per site");
  sub->add_option("--mass", c.mass, "lattice mass");
  sub->add_option("--phimax", c.phi_max, "field cutoff");
  sub->add_option("--coupling", c.coupling, "quartic coupling lambda");
  sub->add_option("--boundary", c.boundary, "periodic|open|free");
  sub->add_option("--stencil", c.stencil, "none|s1|s3");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--format", c.format, "json|csv (emit: text|qasm)");
  sub->add_option("--budget", c.budget, "amplitude budget");
  if (with_state) {
    sub->add_option("--state", c.state_path, "read the state from a saved file");
  }
}

int report(const Error &e) {
  json err = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (const auto *b = dynamic_cast<const BudgetError *>(&e)) {
    err["required_bytes"] = b->required_bytes();
  }
  std::cerr << json{{"error", err}}.dump() << '\n';
  return static_cast<int>(e.kind());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"lattice scalar field ground states, angles and circuits", "lsft"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  Options o;

  auto *kmatrix = app.add_subcommand("kmatrix", "K matrix, covariance and normal modes");
  add_common(kmatrix, c, false);

  auto *corr = app.add_subcommand("correlations", "two-point, K, MI and negativity sweep");
  add_common(corr, c, false);
  corr->add_option("--rmax", o.r_max, "largest separation");
  corr->add_option("--fit-lo", o.fit_lo, "first separation fitted");
  corr->add_option("--fit-hi", o.fit_hi, "last separation fitted");

  auto *gs = app.add_subcommand("groundstate", "digitized free ground state file");
  add_common(gs, c, false);

  auto *angles = app.add_subcommand("angles", "theta and alpha schedules");
  add_common(angles, c, true);
  angles->add_option("--decomposition", o.decomposition, "full|sitewise|theta");

  auto *trunc = app.add_subcommand("truncate", "truncate the alpha schedule and report fidelity");
  add_common(trunc, c, true);
  trunc->add_option("--decomposition", o.decomposition, "full|sitewise");
  trunc->add_option("--hmax", o.h_max, "largest control count kept");
  trunc->add_option("--tau", o.tau, "magnitude floor");

  auto *scan = app.add_subcommand("fidelity-scan", "fidelity over (h_max, tau) grids");
  add_common(scan, c, true);
  scan->add_option("--decomposition", o.decomposition, "full|sitewise");
  scan->add_option("--hvalues", o.h_values, "h_max values")->delimiter(',');
  scan->add_option("--taus", o.tau_values, "tau values")->delimiter(',');
  scan->add_option("--fit-lo", o.fit_lo, "first h_max in the infidelity fit");
  scan->add_option("--fit-hi", o.fit_hi, "last h_max in the infidelity fit");

  auto *env = app.add_subcommand("envelope", "max |alpha| per control distance and fits");
  add_common(env, c, true);
  env->add_option("--decomposition", o.decomposition, "full|sitewise");
  env->add_option("--model", o.model, "powerexp|bessel|pureexp");
  env->add_option("--power", o.power, "power of r in powerexp");
  env->add_option("--fit-lo", o.fit_lo, "first distance fitted");
  env->add_option("--fit-hi", o.fit_hi, "last distance fitted");

  auto *inter = app.add_subcommand("interacting", "lambda phi^4 Lanczos run");
  add_common(inter, c, false);
  inter->add_option("--pi", o.pi_mode, "spectral|central");
  inter->add_option("--tol", o.tolerance, "Lanczos residual tolerance");
  inter->add_option("--max-iter", o.max_iterations, "Lanczos iteration cap");
  inter->add_option("--restart", o.restart, "Krylov basis size before restart");
  inter->add_option("--fit-lo", o.fit_lo, "first distance fitted");
  inter->add_option("--fit-hi", o.fit_hi, "last distance fitted");

  auto *em = app.add_subcommand("emit", "render the preparation circuit");
  add_common(em, c, true);
  em->add_option("--decomposition", o.decomposition, "theta|full|sitewise");
  em->add_option("--hmax", o.h_max, "largest control count kept");
  em->add_option("--tau", o.tau, "magnitude floor");

  auto *rep = app.add_subcommand("reproduce", "datasets at pinned parameters");
  rep->add_option("target", o.target, "fig1|fig2|fig4|fig5|fig6|table1|appendixF-K")->required();
  rep->add_option("--out", c.out, "output directory");
  rep->add_option("--budget", c.budget, "amplitude budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    return report(ValidationError(e.what()));
  }
  if (em->parsed() && !em->count("--format")) {
    c.format = "text";
  }

  try {
    if (kmatrix->parsed()) {
      cmd_kmatrix(c, o);
    } else if (corr->parsed()) {
      cmd_correlations(c, o);
    } else if (gs->parsed()) {
      cmd_groundstate(c, o);
    } else if (angles->parsed()) {
      cmd_angles(c, o);
    } else if (trunc->parsed()) {
      cmd_truncate(c, o);
    } else if (scan->parsed()) {
      cmd_fidelity_scan(c, o);
    } else if (env->parsed()) {
      cmd_envelope(c, o);
    } else if (inter->parsed()) {
      cmd_interacting(c, o, inter->count("--boundary") > 0);
    } else if (em->parsed()) {
      cmd_emit(c, o);
    } else if (rep->parsed()) {
      cmd_reproduce(c, o);
    }
  } catch (const Error &e) {
    return report(e);
  } catch (const nlohmann::json::exception &e) {
    return report(ValidationError(e.what()));
  } catch (const fs::filesystem_error &e) {
    return report(ValidationError(e.what()));
  }
  return 0;
}
