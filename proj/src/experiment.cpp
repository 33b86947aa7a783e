#include "jcarray/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jcarray/output.hpp"

namespace jcarray {

using Json = nlohmann::ordered_json;

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::master: return "master";
    case Engine::trajectories: return "trajectories";
    case Engine::meanfield: return "meanfield";
    case Engine::phase_sweep: return "phase_sweep";
  }
  return "?";
}

std::vector<double> GridSpec::values() const {
  std::vector<double> v;
  if (count == 1) v.push_back(start);
  for (std::size_t k = 0; count > 1 && k < count; ++k) {
    v.push_back(k + 1 == count ? stop : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return v;
}

double ExperimentConfig::t_max() const {
  switch (engine) {
    case Engine::master:
    case Engine::trajectories: return evolution.t_max;
    case Engine::meanfield:
    case Engine::phase_sweep: return meanfield.t_max;
  }
  return 0.0;
}

void ExperimentConfig::set_t_max(double t) {
  evolution.t_max = t;
  meanfield.t_max = t;
}

namespace {

bool quantum(Engine e) { return e == Engine::master || e == Engine::trajectories; }

void check_grid(const GridSpec& g, const std::string& key) {
  if (g.count < 1) throw ValidationError(key + "_count: must be at least 1");
  if (!std::isfinite(g.start) || !std::isfinite(g.stop)) throw ValidationError(key + "_start: must be finite");
  if (g.count > 1 && !(g.stop > g.start)) throw ValidationError(key + "_stop: must exceed " + key + "_start");
}

}  // namespace

void ExperimentConfig::validate() const {
  lattice.validate();
  const std::size_t M = lattice.M;
  if (photons.size() != M)
    throw ValidationError("photons: expected " + std::to_string(M) + " entries, got " + std::to_string(photons.size()));
  if (sz.size() != M)
    throw ValidationError("sz: expected " + std::to_string(M) + " entries, got " + std::to_string(sz.size()));
  for (std::size_t i = 0; i < M; ++i) {
    if (!(photons[i] >= 0.0) || !std::isfinite(photons[i])) throw ValidationError("photons: must be non-negative");
    if (!(sz[i] >= -0.5 && sz[i] <= 0.5)) throw ValidationError("sz: must lie in [-0.5, 0.5]");
    if (quantum(engine)) qubit_state_from_sz(sz[i]);
  }
  if (name.empty() || name.find('/') != std::string::npos) throw ValidationError("name: must be a plain file stem");
  if (!(perturbation >= 0.0)) throw ValidationError("perturbation: must be non-negative");
  if (!(breaks.theta > 0.0 && breaks.theta < 1.0)) throw ValidationError("theta: must lie in (0, 1)");
  if (!(breaks.window >= 0.0)) throw ValidationError("window: must be non-negative");
  if (!(breaks.min_population >= 0.0)) throw ValidationError("min_population: must be non-negative");
  switch (engine) {
    case Engine::master: evolution.validate(); break;
    case Engine::trajectories:
      evolution.validate();
      trajectories.validate();
      break;
    case Engine::meanfield: meanfield.validate(); break;
    case Engine::phase_sweep:
      meanfield.validate();
      check_grid(sweep.d1, "d1");
      check_grid(sweep.axis2, "axis2");
      if (sweep.drive_site >= M) throw ValidationError("drive_site: outside the lattice");
      if (sweep.axis2.start < 0.0) throw ValidationError("axis2_start: rates must be non-negative");
      break;
  }
}

namespace {

class Reader {
 public:
  explicit Reader(const Json& j) : j_(j) {
    if (!j_.is_object()) throw ValidationError("config: expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ValidationError(key + ": expected a number");
    return v->get<double>();
  }

  std::optional<long long> integer(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ValidationError(key + ": expected an integer");
    const double x = v->get<double>();
    if (std::floor(x) != x) throw ValidationError(key + ": expected an integer");
    return static_cast<long long>(x);
  }

  std::optional<std::size_t> count(const std::string& key) {
    auto v = integer(key);
    if (v && *v < 0) throw ValidationError(key + ": must be non-negative");
    return v ? std::optional<std::size_t>(static_cast<std::size_t>(*v)) : std::nullopt;
  }

  std::optional<bool> boolean(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw ValidationError(key + ": expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ValidationError(key + ": expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> per_site(const std::string& key, std::size_t M) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (v->is_number()) return std::vector<double>(M, v->get<double>());
    if (!v->is_array()) throw ValidationError(key + ": expected a number or an array of numbers");
    if (v->size() != M)
      throw ValidationError(key + ": expected " + std::to_string(M) + " entries, got " + std::to_string(v->size()));
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ValidationError(key + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ValidationError(it.key() + ": unknown key");
    }
  }

 private:
  const Json& j_;
  std::set<std::string> used_;
};

template <class T>
void assign(T& target, const std::optional<T>& v) {
  if (v) target = *v;
}

Engine parse_engine(const std::string& s) {
  if (s == "master") return Engine::master;
  if (s == "trajectories") return Engine::trajectories;
  if (s == "meanfield") return Engine::meanfield;
  if (s == "phase_sweep") return Engine::phase_sweep;
  throw ValidationError("engine: expected master, trajectories, meanfield or phase_sweep, got \"" + s + "\"");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  Reader r(j);
  ExperimentConfig c;

  const auto engine = r.string("engine");
  if (!engine) throw ValidationError("engine: required");
  c.engine = parse_engine(*engine);
  assign(c.name, r.string("name"));
  assign(c.description, r.string("description"));
  if (const Json* v = r.get("seed")) {
    if (!v->is_number_unsigned()) throw ValidationError("seed: expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  assign(c.workers, r.count("workers"));

  LatticeConfig& L = c.lattice;
  const auto M = r.count("M");
  if (!M || *M < 1) throw ValidationError("M: required, at least 1");
  L.M = *M;
  assign(L.J, r.number("J"));
  assign(L.delta_c, r.number("delta_c"));
  assign(L.delta_q, r.number("delta_q"));
  assign(L.kappa, r.number("kappa"));
  assign(L.gamma, r.number("gamma"));
  L.g.assign(L.M, 0.0);
  L.d.assign(L.M, 0.0);
  if (r.has("g") && r.has("g_gc")) throw ValidationError("g_gc: give either g or g_gc, not both");
  assign(L.g, r.per_site("g", L.M));
  const auto gc_N = r.number("gc_N");
  if (auto mult = r.per_site("g_gc", L.M)) {
    if (!gc_N) throw ValidationError("gc_N: required with g_gc");
    const double gc = critical_coupling(*gc_N, L.J);
    for (std::size_t i = 0; i < L.M; ++i) L.g[i] = (*mult)[i] * gc;
  } else if (gc_N) {
    throw ValidationError("gc_N: only meaningful with g_gc");
  }
  assign(L.d, r.per_site("d", L.M));
  assign(L.periodic, r.boolean("periodic"));
  assign(c.omit_idle_qubits, r.boolean("omit_idle_qubits"));

  c.photons.assign(L.M, 0.0);
  c.sz.assign(L.M, -0.5);
  assign(c.photons, r.per_site("photons", L.M));
  assign(c.sz, r.per_site("sz", L.M));
  if (auto k = r.string("photon_kind")) {
    if (*k == "fock") c.photon_kind = PhotonKind::fock;
    else if (*k == "coherent") c.photon_kind = PhotonKind::coherent;
    else throw ValidationError("photon_kind: expected fock or coherent");
  }
  assign(c.perturbation, r.number("perturbation"));

  if (auto n = r.integer("n_max")) L.n_max = static_cast<int>(*n);
  else if (quantum(c.engine)) L.n_max = default_cutoff(*std::max_element(c.photons.begin(), c.photons.end()));
  if (auto v = r.per_site("site_cutoffs", L.M)) {
    for (double x : *v) {
      if (std::floor(x) != x) throw ValidationError("site_cutoffs: expected integers");
      L.site_cutoffs.push_back(static_cast<int>(x));
    }
  }

  // Engine defaults differ; the shared keys land in the active engine.
  if (auto t = r.number("t_max")) c.set_t_max(*t);
  else if (c.engine == Engine::phase_sweep) c.set_t_max(1400.0);
  if (auto v = r.number("sample_dt")) c.evolution.sample_dt = c.meanfield.sample_dt = *v;
  if (auto v = r.number("rtol")) c.evolution.rtol = c.trajectories.rtol = c.meanfield.rtol = *v;
  if (auto v = r.number("atol")) c.evolution.atol = c.trajectories.atol = c.meanfield.atol = *v;
  if (auto v = r.number("population_threshold")) c.evolution.population_threshold = c.meanfield.population_threshold = *v;
  assign(c.evolution.truncation_tol, r.number("truncation_tol"));
  assign(c.evolution.positivity_tol, r.number("positivity_tol"));
  if (auto v = r.string("integrator")) {
    if (*v == "chebyshev") c.evolution.integrator = c.trajectories.integrator = Integrator::chebyshev;
    else if (*v == "rk45") c.evolution.integrator = c.trajectories.integrator = Integrator::rk45;
    else throw ValidationError("integrator: expected chebyshev or rk45");
  }
  if (auto v = r.number("chebyshev_max_tau")) c.evolution.chebyshev_max_tau = c.trajectories.chebyshev_max_tau = *v;
  assign(c.evolution.record_g2, r.boolean("record_g2"));
  assign(c.trajectories.n_traj, r.count("n_traj"));
  assign(c.trajectories.jump_time_tol, r.number("jump_time_tol"));
  if (c.engine == Engine::trajectories && !r.has("n_traj")) throw ValidationError("n_traj: required for trajectories");

  assign(c.breaks.theta, r.number("theta"));
  assign(c.breaks.window, r.number("window"));
  assign(c.breaks.min_population, r.number("min_population"));

  assign(c.sweep.d1.start, r.number("d1_start"));
  assign(c.sweep.d1.stop, r.number("d1_stop"));
  assign(c.sweep.d1.count, r.count("d1_count"));
  if (auto a = r.string("axis2")) {
    if (*a == "kappa") c.sweep.axis2_kind = SweepAxis::kappa;
    else if (*a == "gamma") c.sweep.axis2_kind = SweepAxis::gamma;
    else throw ValidationError("axis2: expected kappa or gamma");
  }
  assign(c.sweep.axis2.start, r.number("axis2_start"));
  assign(c.sweep.axis2.stop, r.number("axis2_stop"));
  assign(c.sweep.axis2.count, r.count("axis2_count"));
  assign(c.sweep.drive_site, r.count("drive_site"));
  assign(c.sweep.compare_lo, r.number("compare_lo"));
  assign(c.sweep.compare_hi, r.number("compare_hi"));
  if (c.engine == Engine::phase_sweep) {
    for (const char* key : {"d1_count", "axis2_count"}) {
      if (!r.has(key)) throw ValidationError(std::string(key) + ": required for phase_sweep");
    }
  }

  r.reject_unknown();
  c.trajectories.base_seed = c.seed;
  c.trajectories.workers = c.workers;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& c) {
  const LatticeConfig& L = c.lattice;
  Json j;
  j["engine"] = engine_name(c.engine);
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["M"] = L.M;
  j["J"] = L.J;
  j["delta_c"] = L.delta_c;
  j["delta_q"] = L.delta_q;
  j["g"] = L.g;
  j["d"] = L.d;
  j["kappa"] = L.kappa;
  j["gamma"] = L.gamma;
  j["n_max"] = L.n_max;
  if (!L.site_cutoffs.empty()) j["site_cutoffs"] = L.site_cutoffs;
  j["periodic"] = L.periodic;
  j["omit_idle_qubits"] = c.omit_idle_qubits;
  j["photons"] = c.photons;
  j["sz"] = c.sz;
  j["photon_kind"] = c.photon_kind == PhotonKind::fock ? "fock" : "coherent";
  j["perturbation"] = c.perturbation;
  j["t_max"] = c.t_max();
  const bool q = quantum(c.engine);
  j["sample_dt"] = q ? c.evolution.sample_dt : c.meanfield.sample_dt;
  if (c.engine == Engine::trajectories) {
    j["rtol"] = c.trajectories.rtol;
    j["atol"] = c.trajectories.atol;
  } else {
    j["rtol"] = q ? c.evolution.rtol : c.meanfield.rtol;
    j["atol"] = q ? c.evolution.atol : c.meanfield.atol;
  }
  j["population_threshold"] = q ? c.evolution.population_threshold : c.meanfield.population_threshold;
  if (q) {
    j["truncation_tol"] = c.evolution.truncation_tol;
    j["positivity_tol"] = c.evolution.positivity_tol;
    j["integrator"] = c.evolution.integrator == Integrator::chebyshev ? "chebyshev" : "rk45";
    j["chebyshev_max_tau"] = c.evolution.chebyshev_max_tau;
    j["record_g2"] = c.evolution.record_g2;
  }
  if (c.engine == Engine::trajectories) {
    j["n_traj"] = c.trajectories.n_traj;
    j["jump_time_tol"] = c.trajectories.jump_time_tol;
  }
  j["theta"] = c.breaks.theta;
  j["window"] = c.breaks.window;
  j["min_population"] = c.breaks.min_population;
  if (c.engine == Engine::phase_sweep) {
    j["d1_start"] = c.sweep.d1.start;
    j["d1_stop"] = c.sweep.d1.stop;
    j["d1_count"] = c.sweep.d1.count;
    j["axis2"] = c.sweep.axis2_kind == SweepAxis::kappa ? "kappa" : "gamma";
    j["axis2_start"] = c.sweep.axis2.start;
    j["axis2_stop"] = c.sweep.axis2.stop;
    j["axis2_count"] = c.sweep.axis2.count;
    j["drive_site"] = c.sweep.drive_site;
    j["compare_lo"] = c.sweep.compare_lo;
    j["compare_hi"] = c.sweep.compare_hi;
  }
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : render_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json breaks_json(const BreakTimeResult& b) {
  Json j;
  j["stable"] = b.stable;
  j["t_break"] = optional_json(b.t_break);
  j["z_long"] = optional_json(b.z_long);
  return j;
}

std::string summary_json(const RunSummary& s) {
  Json j;
  j["engine"] = s.engine;
  j["name"] = s.name;
  j["input_hash"] = s.input_hash;
  j["wall_time_s"] = s.wall_time;
  j["samples"] = s.samples;
  if (s.samples > 0) {
    j["final"]["t"] = s.final_time;
    j["final"]["N"] = s.final_N;
    j["final"]["sz"] = s.final_sz;
    j["final"]["z"] = optional_json(s.final_z);
  }
  if (s.breaks) j["break_time"] = breaks_json(*s.breaks);
  j["truncation_peak"] = s.truncation_peak;
  Json files = Json::array();
  for (const auto& p : s.artifacts) files.push_back(p.filename().string());
  j["artifacts"] = files;
  j["diagnostics"] = Json::parse(s.extra_json);
  return j.dump(2) + "\n";
}

}  // namespace

ProductStateSpec product_spec(const ExperimentConfig& c) {
  ProductStateSpec spec;
  spec.photons = c.photons;
  spec.photon_kind = c.photon_kind;
  for (double s : c.sz) spec.qubits.push_back(qubit_state_from_sz(s));
  return spec;
}

namespace {

void fill_final(RunSummary& s, const TimeSeries& ts) {
  s.samples = ts.size();
  if (ts.size() == 0) return;
  s.final_time = ts.times.back();
  s.final_N = ts.N.back();
  s.final_sz = ts.sz.back();
  s.final_z = ts.z.back();
}

std::optional<BreakTimeResult> try_breaks(const TimeSeries& ts, const BreakSettings& b) {
  if (ts.size() == 0 || !ts.z.front()) return std::nullopt;
  if (ts.times.back() - ts.times.front() < b.window) return std::nullopt;
  return detect_t_break(ts, b.theta, b.window, b.min_population);
}

}  // namespace

PhaseSweepSpec sweep_spec(const ExperimentConfig& c) {
  PhaseSweepSpec s;
  s.base = c.lattice;
  s.init = initial_state(c.photons, c.sz, c.lattice);
  if (c.perturbation > 0.0) perturb_coherences(s.init, c.perturbation, c.seed);
  s.d1 = c.sweep.d1.values();
  s.axis2 = c.sweep.axis2.values();
  s.axis2_kind = c.sweep.axis2_kind;
  s.drive_site = c.sweep.drive_site;
  s.horizon = c.meanfield.t_max;
  s.theta = c.breaks.theta;
  s.window = c.breaks.window;
  s.min_population = c.breaks.min_population;
  s.meanfield = c.meanfield;
  s.workers = c.workers;
  return s;
}

namespace {

Json bands_json(const PhaseDiagramGrid& grid) {
  Json rows = Json::array();
  for (const auto& r : grid.rows) {
    Json row;
    row["axis2_value"] = r.axis2;
    row["d1_min"] = optional_json(r.d1_min);
    row["d1_max"] = optional_json(r.d1_max);
    row["min_censored"] = r.min_censored;
    row["max_censored"] = r.max_censored;
    row["contiguous"] = r.contiguous;
    row["isolated_stable_cells"] = r.isolated;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary s;
  s.engine = engine_name(config.engine);
  s.name = config.name;
  s.input_hash = config_hash(config);
  const auto csv_path = output_dir / (config.name + ".csv");
  Json extra;

  switch (config.engine) {
    case Engine::master: {
      const auto spec = product_spec(config);
      const LatticeConfig lat = config.omit_idle_qubits ? omit_idle_qubits(config.lattice, spec.qubits) : config.lattice;
      const auto psi = product_state(spec, lat);
      const auto r = evolve_master(DensityMatrix::pure(psi), lat, config.evolution);
      write_timeseries_csv(r.series, csv_path);
      fill_final(s, r.series);
      s.breaks = try_breaks(r.series, config.breaks);
      s.truncation_peak = r.diagnostics.truncation_peak;
      extra["dimension"] = lat.dimension();
      extra["max_trace_error"] = r.diagnostics.max_trace_error;
      extra["max_hermiticity_drift"] = r.diagnostics.max_hermiticity_drift;
      extra["min_eigenvalue"] = r.diagnostics.min_eigenvalue;
      extra["generator_applications"] = r.diagnostics.generator_applications;
      s.artifacts.push_back(csv_path);
      break;
    }
    case Engine::trajectories: {
      const auto spec = product_spec(config);
      const LatticeConfig lat = config.omit_idle_qubits ? omit_idle_qubits(config.lattice, spec.qubits) : config.lattice;
      TrajectorySettings ts = config.trajectories;
      ts.base_seed = config.seed;
      ts.workers = config.workers;
      const auto r = run_ensemble(spec, lat, ts, config.evolution);
      write_timeseries_csv(r.series, csv_path);
      fill_final(s, r.series);
      s.breaks = try_breaks(r.series, config.breaks);
      s.truncation_peak = r.diagnostics.truncation_peak;
      extra["dimension"] = lat.dimension();
      extra["n_traj"] = ts.n_traj;
      extra["total_jumps"] = r.diagnostics.total_jumps;
      extra["max_norm_error"] = r.diagnostics.max_norm_error;
      s.artifacts.push_back(csv_path);
      break;
    }
    case Engine::meanfield: {
      auto init = initial_state(config.photons, config.sz, config.lattice);
      if (config.perturbation > 0.0) perturb_coherences(init, config.perturbation, config.seed);
      const auto r = evolve_meanfield(init, config.lattice, config.meanfield);
      write_timeseries_csv(r.series, csv_path);
      fill_final(s, r.series);
      s.breaks = try_breaks(r.series, config.breaks);
      extra["accepted_steps"] = r.stats.accepted;
      extra["rejected_steps"] = r.stats.rejected;
      extra["underflow_steps"] = r.stats.underflow_steps;
      extra["first_underflow_time"] = optional_json(r.stats.first_underflow_time);
      s.artifacts.push_back(csv_path);
      break;
    }
    case Engine::phase_sweep: {
      const auto grid = phase_sweep(sweep_spec(config));
      write_text(csv_path, phase_csv(grid));
      s.artifacts.push_back(csv_path);
      std::size_t failed = 0;
      for (const auto& cell : grid.cells) failed += cell.error ? 1 : 0;
      extra["cells"] = grid.cells.size();
      extra["failed_cells"] = failed;
      extra["rows"] = bands_json(grid);
      const double g = config.lattice.g[config.sweep.drive_site];
      const bool has_curve = config.sweep.axis2_kind == SweepAxis::kappa && g > 0.0 &&
                             config.sweep.d1.stop > analytic_boundary_drive(0.0, g, config.lattice.delta_q);
      if (has_curve) {
        const auto curve = boundary_curve(g, config.lattice.delta_q, config.sweep.d1.start, config.sweep.d1.stop, 201);
        const auto curve_path = output_dir / (config.name + "_curve.csv");
        write_text(curve_path, boundary_csv(curve));
        s.artifacts.push_back(curve_path);
        Json cj;
        cj["d1"] = curve.d1;
        cj["kappa"] = curve.kappa;
        cj["d1_min"] = curve.d1_min;
        extra["analytic_curve"] = cj;
        // Densely sampled copy so rows beyond the sweep range still compare.
        const auto fine = boundary_curve(g, config.lattice.delta_q, 0.0,
                                         analytic_boundary_drive(config.sweep.axis2.stop, g, config.lattice.delta_q),
                                         4001);
        try {
          const auto cmp = compare_boundary(grid, fine, config.sweep.compare_lo, config.sweep.compare_hi);
          extra["boundary_deviation"]["max_relative"] = cmp.max_deviation;
          extra["boundary_deviation"]["rows_compared"] = cmp.rows_compared;
          extra["boundary_deviation"]["worst_axis2"] = optional_json(cmp.worst_axis2);
        } catch (const ValidationError&) {
          extra["boundary_deviation"] = nullptr;
        }
      }
      break;
    }
  }

  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.extra_json = extra.is_null() ? "{}" : extra.dump();
  const auto json_path = output_dir / (config.name + ".json");
  s.artifacts.push_back(json_path);
  write_text(json_path, summary_json(s));
  return s;
}

RunSummary run_boundary(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary s;
  s.engine = "boundary";
  s.name = config.name;
  s.input_hash = config_hash(config);
  const std::size_t site = config.sweep.drive_site;
  if (site >= config.lattice.M) throw ValidationError("drive_site: outside the lattice");
  const double g = config.lattice.g[site];
  if (!(g > 0.0)) throw ValidationError("g: the boundary needs g > 0 at the drive site");
  const double hi = config.engine == Engine::phase_sweep && config.sweep.d1.count > 1
                        ? config.sweep.d1.stop
                        : analytic_boundary_drive(0.2, g, config.lattice.delta_q);
  const double lo = config.engine == Engine::phase_sweep ? config.sweep.d1.start : 0.0;
  const auto curve = boundary_curve(g, config.lattice.delta_q, lo, hi, 201);
  const auto path = output_dir / (config.name + "_boundary.csv");
  write_text(path, boundary_csv(curve));
  s.artifacts.push_back(path);
  Json extra;
  extra["d1_min"] = curve.d1_min;
  extra["g"] = g;
  extra["delta_q"] = config.lattice.delta_q;
  s.extra_json = extra.dump();
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto json_path = output_dir / (config.name + "_boundary.json");
  s.artifacts.push_back(json_path);
  write_text(json_path, summary_json(s));
  return s;
}

}  // namespace jcarray
