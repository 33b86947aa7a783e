#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "jcarray/chebyshev.hpp"
#include "jcarray/lattice.hpp"
#include "jcarray/sparse_kernel.hpp"
#include "jcarray/timeseries.hpp"
#include "jcarray/types.hpp"

namespace jcarray {

struct DensityMatrix {
  DenseMatrix matrix;
  double time = 0.0;

  static DensityMatrix pure(const StateVector& psi, double time = 0.0);
  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  double trace_error() const;
  /// ||rho - rho^+|| / ||rho|| in the Frobenius norm.
  double hermiticity_drift() const;
  double min_eigenvalue() const;
};

enum class Integrator { chebyshev, rk45 };

struct EvolutionSettings {
  double t_max = 100.0;
  double sample_dt = 1.0;
  double rtol = 1e-6;
  double atol = 1e-9;
  // Largest population tolerated on any site's top Fock level.
  double truncation_tol = 1e-4;
  double positivity_tol = 1e-6;
  // Samples between eigenvalue checks; 0 picks a stride from the dimension.
  std::size_t positivity_stride = 0;
  Integrator integrator = Integrator::chebyshev;
  // Scaled time per Chebyshev expansion (see ChebyshevOptions).
  double chebyshev_max_tau = 100.0;
  bool record_g2 = false;
  double population_threshold = 1e-10;

  void validate() const;
};

/// Lindblad generator held in the form used by the propagators:
///   L(rho) = -i (K rho - rho K^+) + sum_k C_k rho C_k^+,  K = H - (i/2) sum C^+C.
/// Jump operators with at most one entry per row (ladder operators) are
/// applied as weighted index gathers.
class LindbladGenerator {
 public:
  LindbladGenerator(const SparseMatrix& hamiltonian, const std::vector<SparseMatrix>& collapse);

  std::size_t dimension() const { return dim_; }
  const SparseMatrix& effective_hamiltonian() const { return k_; }

  /// out = L(rho) for Hermitian rho.
  void lindblad(const DenseMatrix& rho, DenseMatrix& out) const;

  /// out = i L(in) where in^+ = parity * in.
  void apply_scaled(const DenseMatrix& in, int parity, DenseMatrix& out) const;

  /// Upper bound on the spread of the commutator spectrum plus total decay.
  double spectral_half_width() const { return half_width_; }

 private:
  struct Gather {
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> src;
    std::vector<Complex> weight;
  };

  void add_jump(DenseMatrix& out, Complex factor, const DenseMatrix& rho) const;
  void commutator_part(const DenseMatrix& x, Complex self, Complex adj, DenseMatrix& out) const;

  std::size_t dim_;
  SparseMatrix k_;
  SplitSparseOperator k_op_{SparseMatrix()};
  std::vector<Gather> gathers_;
  std::vector<SparseMatrix> general_;  // jump operators not in gather form
  double half_width_;
  mutable DenseMatrix scratch_;
};

/// -i[H, rho] + sum_k (2 C rho C^+ - C^+C rho - rho C^+C) / 2.
DenseMatrix lindblad_rhs(const DensityMatrix& rho, const EmbeddedOperator& H, const std::vector<CollapseOperator>& collapse);

/// Tr[op rho].
Complex expectation(const EmbeddedOperator& op, const DensityMatrix& rho);

/// <a^+a^+aa> / <a^+a>^2 at one site; empty when <a^+a> <= threshold.
std::optional<double> g2_zero(const DensityMatrix& rho, std::size_t site, const LatticeConfig& config,
                              double threshold = 1e-10);

struct MasterDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_drift = 0.0;
  double min_eigenvalue = 0.0;
  double truncation_peak = 0.0;
  long generator_applications = 0;
};

struct MasterResult {
  TimeSeries series;
  DensityMatrix final_state;
  MasterDiagnostics diagnostics;
};

using DensityObserver = std::function<void(double, const DenseMatrix&)>;

/// Integrates the master equation from rho0 and samples observables on the
/// grid 0, sample_dt, ..., t_max. Throws TruncationError when a site's top
/// Fock level exceeds truncation_tol and IntegrationError when positivity or
/// trace drift exceed tolerance.
MasterResult evolve_master(const DensityMatrix& rho0, const LatticeConfig& config, const EvolutionSettings& settings,
                           const DensityObserver& observer = {});

}  // namespace jcarray
