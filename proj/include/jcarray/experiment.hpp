#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jcarray/analysis.hpp"
#include "jcarray/lattice.hpp"
#include "jcarray/master.hpp"
#include "jcarray/meanfield.hpp"
#include "jcarray/trajectories.hpp"

namespace jcarray {

enum class Engine { master, trajectories, meanfield, phase_sweep };

const char* engine_name(Engine e);

/// Evenly spaced grid start, ..., stop with `count` points.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 0;

  std::vector<double> values() const;
};

struct SweepConfig {
  GridSpec d1;
  GridSpec axis2;
  SweepAxis axis2_kind = SweepAxis::kappa;
  std::size_t drive_site = 0;
  // kappa range over which compare_boundary is reported (kappa sweeps only).
  double compare_lo = 0.05;
  double compare_hi = 0.2;
};

struct BreakSettings {
  double theta = 0.5;
  double window = 10.0;
  double min_population = 1e-2;
};

/// Everything needed to reproduce one run. Per-site arrays have length M.
struct ExperimentConfig {
  Engine engine = Engine::meanfield;
  std::string name = "run";
  std::string description;
  std::uint64_t seed = 0;
  std::size_t workers = 0;

  LatticeConfig lattice;
  bool omit_idle_qubits = true;

  std::vector<double> photons;
  std::vector<double> sz;  // -1/2, +1/2, or 0 for the superposition (quantum engines)
  PhotonKind photon_kind = PhotonKind::fock;
  double perturbation = 0.0;  // mean-field s^- kick amplitude

  EvolutionSettings evolution;
  TrajectorySettings trajectories;
  MeanfieldSettings meanfield;
  SweepConfig sweep;
  BreakSettings breaks;

  double t_max() const;
  void set_t_max(double t);
  /// Throws ValidationError naming the offending key.
  void validate() const;
};

/// Initial product state of a quantum-engine config.
ProductStateSpec product_spec(const ExperimentConfig& config);

/// Phase sweep described by a phase_sweep config.
PhaseSweepSpec sweep_spec(const ExperimentConfig& config);

/// Parses a flat JSON document. Keys:
///   engine, name, description, seed, workers,
///   M, J, delta_c, delta_q, g | g_gc (+ gc_N), d, kappa, gamma, n_max,
///   site_cutoffs, periodic, omit_idle_qubits,
///   photons, sz, photon_kind, perturbation,
///   t_max, sample_dt, rtol, atol, truncation_tol, positivity_tol, integrator,
///   chebyshev_max_tau, record_g2, population_threshold, n_traj, jump_time_tol,
///   theta, window, min_population,
///   d1_start, d1_stop, d1_count, axis2, axis2_start, axis2_stop, axis2_count,
///   drive_site, compare_lo, compare_hi.
/// Per-site values accept a scalar (applied to every site) or an array of
/// length M. g_gc gives couplings in units of 2.8 sqrt(gc_N) J. Unknown keys
/// are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical rendering, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct RunSummary {
  std::string engine;
  std::string name;
  std::string input_hash;
  double wall_time = 0.0;
  std::size_t samples = 0;
  double final_time = 0.0;
  std::vector<double> final_N;
  std::vector<double> final_sz;
  std::optional<double> final_z;
  std::optional<BreakTimeResult> breaks;
  double truncation_peak = 0.0;
  std::vector<std::filesystem::path> artifacts;
  std::string extra_json = "{}";  // engine-specific diagnostics
};

/// Dispatches to the engine and writes <name>.csv and <name>.json into
/// output_dir (phase sweeps also write <name>_curve.csv for kappa sweeps).
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir);

/// Writes the analytic stability boundary for the config's drive range and couplings to
/// <name>_boundary.csv.
RunSummary run_boundary(const ExperimentConfig& config, const std::filesystem::path& output_dir);

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_unexpected = 1,
  exit_validation = 2,
  exit_truncation = 3,
  exit_integration = 4,
  exit_io = 5,
};

}  // namespace jcarray
