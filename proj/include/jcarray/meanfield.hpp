#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jcarray/lattice.hpp"
#include "jcarray/ode.hpp"
#include "jcarray/timeseries.hpp"

namespace jcarray {

/// Factorized expectation values <a_i>, <s^-_i>, <s^z_i>.
struct SemiclassicalState {
  std::vector<Complex> alpha;
  std::vector<Complex> sm;
  std::vector<double> sz;
  double time = 0.0;

  std::size_t size() const { return alpha.size(); }
};

struct MeanfieldSettings {
  double t_max = 100.0;
  double sample_dt = 0.1;
  double rtol = 1e-8;
  double atol = 1e-10;
  double population_threshold = 1e-10;

  void validate() const;
};

/// Time derivative of the semiclassical equations:
///   a'  = -i dc a - i g s^- + i J (a_{i+1} + a_{i-1}) - (kappa/2) a - i d
///   s^-' = -i dq s^- + 2 i g a s^z - (gamma/2) s^-
///   s^z' = -i g (s^+ a - a^* s^-) - gamma (s^z + 1/2)
/// Neighbours follow config.bonds(), so open-chain ends have one.
SemiclassicalState meanfield_rhs(const SemiclassicalState& state, const LatticeConfig& config);

/// alpha_i = sqrt(photons_i), s^-_i = 0, s^z as given.
SemiclassicalState initial_state(const std::vector<double>& photons, const std::vector<double>& sz,
                                 const LatticeConfig& config);

/// Adds amplitude * exp(i phi_i) to every s^-_i with phases drawn from
/// mt19937_64(seed). Breaks the exact s^- = 0 symmetry for robustness runs.
void perturb_coherences(SemiclassicalState& state, double amplitude, std::uint64_t seed);

struct MeanfieldResult {
  TimeSeries series;
  SemiclassicalState final_state;
  Dopri5Stats stats;
};

/// Adaptive Dormand-Prince integration sampled on 0, dt, ..., t_max. A step
/// forced at the step-size floor does not abort the run; every sample from
/// that point on is flagged precision_limited and the time of the first
/// alarm is kept in stats.first_underflow_time.
MeanfieldResult evolve_meanfield(const SemiclassicalState& init, const LatticeConfig& config,
                                 const MeanfieldSettings& settings);

}  // namespace jcarray
