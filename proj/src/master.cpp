#include "jcarray/master.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jcarray/chebyshev.hpp"
#include "jcarray/ode.hpp"

namespace jcarray {

namespace {

void check_square(const DenseMatrix& m, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + " vs " + std::to_string(dim) + ")");
  }
}

// Sum_k C_k^+ C_k.
SparseMatrix decay_operator(std::size_t dim, const std::vector<SparseMatrix>& collapse) {
  SparseMatrix gamma(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& c : collapse) gamma += SparseMatrix(SparseMatrix(c.adjoint()) * c);
  return gamma;
}

double trace_error_of(const DenseMatrix& m) { return std::abs(m.trace() - Complex(1.0, 0.0)); }

double hermiticity_drift_of(const DenseMatrix& m) {
  const double n = m.norm();
  if (n == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / n;
}

double min_eigenvalue_of(const DenseMatrix& m) {
  const DenseMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

DensityMatrix DensityMatrix::pure(const StateVector& psi, double time) {
  return {psi * psi.adjoint(), time};
}

double DensityMatrix::trace_error() const { return trace_error_of(matrix); }
double DensityMatrix::hermiticity_drift() const { return hermiticity_drift_of(matrix); }
double DensityMatrix::min_eigenvalue() const { return min_eigenvalue_of(matrix); }

void EvolutionSettings::validate() const {
  if (!(t_max > 0.0)) throw ValidationError("t_max: must be positive");
  if (!(sample_dt > 0.0)) throw ValidationError("sample_dt: must be positive");
  if (!(rtol > 0.0)) throw ValidationError("rtol: must be positive");
  if (!(atol > 0.0)) throw ValidationError("atol: must be positive");
  if (!(truncation_tol > 0.0)) throw ValidationError("truncation_tol: must be positive");
  if (!(positivity_tol > 0.0)) throw ValidationError("positivity_tol: must be positive");
}

LindbladGenerator::LindbladGenerator(const SparseMatrix& hamiltonian, const std::vector<SparseMatrix>& collapse)
    : dim_(static_cast<std::size_t>(hamiltonian.rows())) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw ValidationError("Hamiltonian must be square");
  for (const auto& c : collapse) {
    if (c.rows() != hamiltonian.rows() || c.cols() != hamiltonian.cols()) {
      throw ValidationError("collapse operator dimension mismatch");
    }
  }
  const SparseMatrix gamma = decay_operator(dim_, collapse);
  k_ = hamiltonian - Complex(0.0, 0.5) * gamma;
  k_.makeCompressed();
  k_op_ = SplitSparseOperator(k_);

  for (const auto& c : collapse) {
    bool single_entry_rows = true;
    Gather g;
    for (Eigen::Index r = 0; r < c.outerSize() && single_entry_rows; ++r) {
      int count = 0;
      for (SparseMatrix::InnerIterator it(c, r); it; ++it) {
        if (it.value() == Complex(0.0, 0.0)) continue;
        if (++count > 1) {
          single_entry_rows = false;
          break;
        }
        g.rows.push_back(r);
        g.src.push_back(it.col());
        g.weight.push_back(it.value());
      }
    }
    if (single_entry_rows) {
      gathers_.push_back(std::move(g));
    } else {
      general_.push_back(c);
    }
  }

  const SpectralBounds hb = hermitian_bounds(hamiltonian);
  double decay_max = 0.0;
  for (Eigen::Index r = 0; r < gamma.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(gamma, r); it; ++it) row += std::abs(it.value());
    decay_max = std::max(decay_max, row);
  }
  half_width_ = 1.05 * (hb.upper - hb.lower) + decay_max + 1e-12;
}

void LindbladGenerator::add_jump(DenseMatrix& out, Complex factor, const DenseMatrix& rho) const {
  for (const auto& g : gathers_) {
    const std::size_t n = g.rows.size();
    for (std::size_t b = 0; b < n; ++b) {
      const Complex wy = factor * std::conj(g.weight[b]);
      const Complex* src_col = rho.col(g.src[b]).data();
      Complex* out_col = out.col(g.rows[b]).data();
      for (std::size_t a = 0; a < n; ++a) out_col[g.rows[a]] += (g.weight[a] * wy) * src_col[g.src[a]];
    }
  }
  for (const auto& c : general_) {
    scratch_.noalias() = c * rho;
    out.noalias() += factor * (c * scratch_.adjoint()).adjoint();
  }
}

void LindbladGenerator::commutator_part(const DenseMatrix& x, Complex self, Complex adj, DenseMatrix& out) const {
  // out = self * x + adj * x^+, blocked for cache locality.
  const auto n = static_cast<Eigen::Index>(dim_);
  out.resize(n, n);
  constexpr Eigen::Index block = 32;
  for (Eigen::Index jb = 0; jb < n; jb += block) {
    const Eigen::Index je = std::min(n, jb + block);
    for (Eigen::Index ib = 0; ib < n; ib += block) {
      const Eigen::Index ie = std::min(n, ib + block);
      for (Eigen::Index j = jb; j < je; ++j) {
        for (Eigen::Index i = ib; i < ie; ++i) out(i, j) = self * x(i, j) + adj * std::conj(x(j, i));
      }
    }
  }
}

void LindbladGenerator::lindblad(const DenseMatrix& rho, DenseMatrix& out) const {
  // -i (K rho - rho K^+) with rho K^+ = (K rho)^+ for Hermitian rho.
  k_op_.apply(rho, scratch_);
  commutator_part(scratch_, Complex(0.0, -1.0), Complex(0.0, 1.0), out);
  add_jump(out, Complex(1.0, 0.0), rho);
}

void LindbladGenerator::apply_scaled(const DenseMatrix& in, int parity, DenseMatrix& out) const {
  // i L(in) = K in - in K^+ + i sum C in C^+, with in K^+ = parity (K in)^+.
  k_op_.apply(in, scratch_);
  commutator_part(scratch_, Complex(1.0, 0.0), Complex(parity > 0 ? -1.0 : 1.0, 0.0), out);
  add_jump(out, Complex(0.0, 1.0), in);
}

DenseMatrix lindblad_rhs(const DensityMatrix& rho, const EmbeddedOperator& H, const std::vector<CollapseOperator>& collapse) {
  const std::size_t dim = H.dimension();
  check_square(rho.matrix, dim, "lindblad_rhs");
  const DenseMatrix& r = rho.matrix;
  DenseMatrix hr = H.matrix * r;
  DenseMatrix rh = r * H.matrix;
  DenseMatrix out = Complex(0.0, -1.0) * (hr - rh);
  for (const auto& c : collapse) {
    if (static_cast<std::size_t>(c.matrix.rows()) != dim) throw ValidationError("lindblad_rhs: collapse dimension mismatch");
    const SparseMatrix cd = c.matrix.adjoint();
    const SparseMatrix cdc = cd * c.matrix;
    DenseMatrix cr = c.matrix * r;
    DenseMatrix crc = cr * cd;
    DenseMatrix cdcr = cdc * r;
    DenseMatrix rcdc = r * cdc;
    out += 0.5 * (2.0 * crc - cdcr - rcdc);
  }
  return out;
}

Complex expectation(const EmbeddedOperator& op, const DensityMatrix& rho) {
  const std::size_t dim = op.dimension();
  check_square(rho.matrix, dim, "expectation");
  Complex acc(0.0, 0.0);
  for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(op.matrix, r); it; ++it) acc += it.value() * rho.matrix(it.col(), it.row());
  }
  return acc;
}

namespace {

struct SiteMoments {
  double n = 0.0;
  double nn1 = 0.0;  // <n(n-1)> = <a^+a^+aa>
};

SiteMoments site_moments(const DenseMatrix& rho, const Eigen::VectorXd& n_diag) {
  SiteMoments m;
  for (Eigen::Index k = 0; k < rho.rows(); ++k) {
    const double p = rho(k, k).real();
    const double n = n_diag(k);
    m.n += n * p;
    m.nn1 += n * (n - 1.0) * p;
  }
  return m;
}

std::optional<double> g2_from_moments(const SiteMoments& m, double threshold) {
  if (!(m.n > threshold)) return std::nullopt;
  return m.nn1 / (m.n * m.n);
}

}  // namespace

std::optional<double> g2_zero(const DensityMatrix& rho, std::size_t site, const LatticeConfig& config, double threshold) {
  if (site >= config.M) throw ValidationError("g2_zero: site index out of range");
  check_square(rho.matrix, config.dimension(), "g2_zero");
  const auto diag = site_diagonals(config);
  return g2_from_moments(site_moments(rho.matrix, diag.n[site]), threshold);
}

MasterResult evolve_master(const DensityMatrix& rho0, const LatticeConfig& config, const EvolutionSettings& settings,
                           const DensityObserver& observer) {
  config.validate();
  settings.validate();
  const std::size_t dim = config.dimension();
  check_square(rho0.matrix, dim, "evolve_master");
  if (rho0.trace_error() > 1e-8) throw ValidationError("rho0: trace differs from 1");
  if (rho0.hermiticity_drift() > 1e-10) throw ValidationError("rho0: not Hermitian");

  const auto H = build_hamiltonian(config);
  const auto collapse_ops = build_collapse_operators(config);
  std::vector<SparseMatrix> collapse;
  for (const auto& c : collapse_ops) collapse.push_back(c.matrix);
  const LindbladGenerator gen(H.matrix, collapse);
  const auto diag = site_diagonals(config);

  const auto grid = sample_grid(settings.t_max, settings.sample_dt);
  std::size_t stride = settings.positivity_stride;
  if (stride == 0) stride = dim <= 300 ? 1 : std::max<std::size_t>(1, grid.size() / 20);

  MasterResult result;
  auto& ts = result.series;
  ts.M = config.M;
  ts.has_g2 = settings.record_g2;
  auto& diagn = result.diagnostics;
  diagn.min_eigenvalue = std::numeric_limits<double>::infinity();

  auto record = [&](std::size_t index, double t, DenseMatrix& rho) {
    const double trace_err = trace_error_of(rho);
    const double herm = hermiticity_drift_of(rho);
    diagn.max_trace_error = std::max(diagn.max_trace_error, trace_err);
    diagn.max_hermiticity_drift = std::max(diagn.max_hermiticity_drift, herm);
    if (trace_err > 1e-4) {
      throw IntegrationError("master equation: trace drifted by " + std::to_string(trace_err) + " at t=" + std::to_string(t));
    }
    if (index % stride == 0 || index + 1 == grid.size()) {
      const double lam = min_eigenvalue_of(rho);
      diagn.min_eigenvalue = std::min(diagn.min_eigenvalue, lam);
      if (lam < -settings.positivity_tol) {
        throw IntegrationError("master equation: density matrix eigenvalue " + std::to_string(lam) + " at t=" +
                               std::to_string(t) + " violates positivity");
      }
    }

    std::vector<double> N(config.M), sz(config.M);
    std::vector<std::optional<double>> g2(config.M);
    for (std::size_t i = 0; i < config.M; ++i) {
      const auto m = site_moments(rho, diag.n[i]);
      N[i] = m.n;
      double s = 0.0, top = 0.0;
      for (Eigen::Index k = 0; k < rho.rows(); ++k) {
        const double p = rho(k, k).real();
        s += diag.sz[i](k) * p;
        top += diag.top_level[i](k) * p;
      }
      sz[i] = s;
      g2[i] = g2_from_moments(m, settings.population_threshold);
      diagn.truncation_peak = std::max(diagn.truncation_peak, top);
      if (top > settings.truncation_tol) {
        throw TruncationError("site " + std::to_string(i) + " top Fock level population " + std::to_string(top) +
                              " exceeds truncation_tol at t=" + std::to_string(t) + "; raise the cutoff");
      }
    }
    ts.times.push_back(t);
    ts.z.push_back(imbalance(N, settings.population_threshold));
    ts.N.push_back(std::move(N));
    ts.sz.push_back(std::move(sz));
    if (settings.record_g2) ts.g2.push_back(std::move(g2));
    ts.precision_limited.push_back(false);
    if (observer) observer(t, rho);
  };

  DenseMatrix rho = rho0.matrix;
  record(0, grid[0], rho);

  if (settings.integrator == Integrator::chebyshev) {
    ChebyshevPropagator<DenseMatrix> prop(
        [&gen](const DenseMatrix& in, int parity, DenseMatrix& out) { gen.apply_scaled(in, parity, out); }, 0.0,
        gen.spectral_half_width(), ChebyshevOptions{settings.chebyshev_max_tau});
    for (std::size_t k = 1; k < grid.size(); ++k) {
      prop.propagate(rho, grid[k] - grid[k - 1], +1);
      record(k, grid[k], rho);
    }
    diagn.generator_applications = prop.applications();
  } else {
    Dopri5Options opt;
    opt.rtol = settings.rtol;
    opt.atol = settings.atol;
    Dopri5<DenseMatrix> ode([&gen](double, const DenseMatrix& y, DenseMatrix& dy) { gen.lindblad(y, dy); }, opt);
    ode.reset(grid[0], rho);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      ode.advance_to(grid[k]);
      if (ode.stats().underflow_steps > 0) {
        throw IntegrationError("master equation: step size underflow at t=" +
                               std::to_string(*ode.stats().first_underflow_time));
      }
      rho = ode.state();
      record(k, grid[k], rho);
    }
    diagn.generator_applications = ode.stats().rhs_evaluations;
  }

  result.final_state = {std::move(rho), grid.back()};
  return result;
}

}  // namespace jcarray
