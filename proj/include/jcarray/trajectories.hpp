#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "jcarray/chebyshev.hpp"
#include "jcarray/lattice.hpp"
#include "jcarray/master.hpp"
#include "jcarray/sparse_kernel.hpp"
#include "jcarray/timeseries.hpp"

namespace jcarray {

struct TrajectorySettings {
  std::size_t n_traj = 1;
  std::uint64_t base_seed = 0;
  double jump_time_tol = 1e-6;
  // Used when integrator == rk45.
  double rtol = 1e-8;
  double atol = 1e-10;
  Integrator integrator = Integrator::chebyshev;
  double chebyshev_max_tau = 100.0;
  // 0 = one worker per hardware thread.
  std::size_t workers = 0;

  void validate() const;
};

struct JumpEvent {
  double time;
  std::size_t channel;  // index into the collapse list
};

/// Uniform double in (0, 1) from the top 53 bits of the generator output.
/// Spelled out so that streams do not depend on the standard library's
/// distribution implementation.
double uniform_open(std::mt19937_64& rng);

/// H - (i/2) sum_k C_k^+ C_k.
EmbeddedOperator effective_hamiltonian(const EmbeddedOperator& H, const std::vector<CollapseOperator>& collapse);

/// Non-unitary evolution under H_eff with waiting-time jumps. Holds the
/// propagator for one operator set; const methods are safe to call from
/// several threads.
class TrajectoryStepper {
 public:
  TrajectoryStepper(const EmbeddedOperator& H_eff, const std::vector<CollapseOperator>& collapse,
                    const TrajectorySettings& settings);

  /// Advances a normalized state from t0 to t1: draws r in (0,1), evolves
  /// until ||psi||^2 <= r, bisects the crossing to jump_time_tol, applies a
  /// channel chosen with probability proportional to ||C_k psi||^2,
  /// renormalizes and redraws. Returns the normalized state at t1.
  StateVector advance(const StateVector& psi, double t0, double t1, std::mt19937_64& rng,
                      std::vector<JumpEvent>* jumps = nullptr) const;

  std::size_t dimension() const { return static_cast<std::size_t>(k_.rows()); }

 private:
  void propagate(StateVector& psi, double dt) const;

  SparseMatrix k_;
  SplitSparseOperator k_op_;
  std::vector<SparseMatrix> collapse_;
  TrajectorySettings settings_;
  double center_ = 0.0;
  double half_width_ = 1.0;
  double check_interval_ = 1.0;
};

/// Single-call form of TrajectoryStepper::advance.
StateVector advance_trajectory(const StateVector& psi, double t0, double t1, const EmbeddedOperator& H_eff,
                               const std::vector<CollapseOperator>& collapse, std::mt19937_64& rng,
                               const TrajectorySettings& settings = {}, std::vector<JumpEvent>* jumps = nullptr);

struct EnsembleDiagnostics {
  std::size_t total_jumps = 0;
  std::vector<std::size_t> jumps_per_trajectory;
  double truncation_peak = 0.0;  // largest ensemble-mean top-level population
  double max_norm_error = 0.0;   // largest | ||psi|| - 1 | at a sample
};

struct TrajectoryEnsembleResult {
  TimeSeries series;  // means with standard errors
  EnsembleDiagnostics diagnostics;
};

/// Runs n_traj trajectories from a product state. Trajectory k draws from
/// mt19937_64 seeded with base_seed + k; the reduction runs in trajectory
/// order, so results do not depend on the worker count. z is the imbalance
/// of the ensemble-mean populations with a delta-method standard error.
TrajectoryEnsembleResult run_ensemble(const ProductStateSpec& spec, const LatticeConfig& config,
                                      const TrajectorySettings& settings, const EvolutionSettings& evo);

}  // namespace jcarray
