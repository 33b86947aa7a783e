#include "jcarray/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jcarray/ode.hpp"
#include "jcarray/parallel.hpp"

namespace jcarray {

void TrajectorySettings::validate() const {
  if (n_traj < 1) throw ValidationError("n_traj: must be at least 1");
  if (!(jump_time_tol > 0.0)) throw ValidationError("jump_time_tol: must be positive");
  if (!(rtol > 0.0)) throw ValidationError("rtol: must be positive");
  if (!(atol > 0.0)) throw ValidationError("atol: must be positive");
  if (!(chebyshev_max_tau > 0.0)) throw ValidationError("chebyshev_max_tau: must be positive");
}

double uniform_open(std::mt19937_64& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

EmbeddedOperator effective_hamiltonian(const EmbeddedOperator& H, const std::vector<CollapseOperator>& collapse) {
  SparseMatrix k = H.matrix;
  for (const auto& c : collapse) {
    if (c.matrix.rows() != H.matrix.rows()) throw ValidationError("effective_hamiltonian: collapse dimension mismatch");
    k -= Complex(0.0, 0.5) * SparseMatrix(SparseMatrix(c.matrix.adjoint()) * c.matrix);
  }
  k.prune(Complex(0.0, 0.0));
  k.makeCompressed();
  return {std::nullopt, std::move(k)};
}

TrajectoryStepper::TrajectoryStepper(const EmbeddedOperator& H_eff, const std::vector<CollapseOperator>& collapse,
                                     const TrajectorySettings& settings)
    : k_(H_eff.matrix), k_op_(H_eff.matrix), settings_(settings) {
  settings_.validate();
  for (const auto& c : collapse) {
    if (c.matrix.rows() != k_.rows()) throw ValidationError("trajectory: collapse dimension mismatch");
    collapse_.push_back(c.matrix);
  }
  const SparseMatrix kd = k_.adjoint();
  const SparseMatrix herm = 0.5 * (k_ + kd);
  const SparseMatrix decay = Complex(0.0, 1.0) * (k_ - kd);  // sum C^+C
  const SpectralBounds hb = hermitian_bounds(herm);
  double decay_max = 0.0;
  for (Eigen::Index r = 0; r < decay.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(decay, r); it; ++it) row += std::abs(it.value());
    decay_max = std::max(decay_max, row);
  }
  center_ = hb.center();
  half_width_ = 1.05 * hb.half_width() + 0.5 * decay_max + 1e-12;
  check_interval_ = settings_.chebyshev_max_tau / half_width_;
}

void TrajectoryStepper::propagate(StateVector& psi, double dt) const {
  if (dt <= 0.0) return;
  if (settings_.integrator == Integrator::chebyshev) {
    const ChebyshevPropagator<StateVector> prop(
        [this](const StateVector& in, int, StateVector& out) { k_op_.apply(in, out); }, center_, half_width_,
        ChebyshevOptions{settings_.chebyshev_max_tau});
    prop.propagate(psi, dt);
    return;
  }
  Dopri5Options opt;
  opt.rtol = settings_.rtol;
  opt.atol = settings_.atol;
  Dopri5<StateVector> ode(
      [this](double, const StateVector& y, StateVector& dy) { 
        k_op_.apply(y, dy);
        dy *= Complex(0.0, -1.0);
      }, opt);
  ode.reset(0.0, psi);
  ode.advance_to(dt);
  if (ode.stats().underflow_steps > 0) throw IntegrationError("trajectory: step size underflow");
  psi = ode.state();
}

StateVector TrajectoryStepper::advance(const StateVector& psi0, double t0, double t1, std::mt19937_64& rng,
                                       std::vector<JumpEvent>* jumps) const {
  if (static_cast<std::size_t>(psi0.size()) != dimension()) throw ValidationError("trajectory: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-8) throw ValidationError("trajectory: initial state is not normalized");
  if (t1 < t0) throw ValidationError("trajectory: t1 < t0");

  StateVector psi = psi0;
  double r = uniform_open(rng);
  double t = t0;
  StateVector lo_state, trial, scratch;
  while (t < t1) {
    const double h = std::min(check_interval_, t1 - t);
    lo_state = psi;
    propagate(psi, h);
    if (psi.squaredNorm() > r) {
      t += h;
      continue;
    }

    // Crossing inside (t, t + h]. Bracketed search on f = ln(||psi||^2 / r),
    // which is close to linear in time: bisection accelerated by Illinois
    // false position, stopped once the bracket or the secant estimate of
    // the time error is below jump_time_tol.
    double lo = 0.0, hi = h;
    double f_lo = std::log(lo_state.squaredNorm() / r);
    double f_hi = std::log(psi.squaredNorm() / r);  // psi tracks the state at hi
    int side = 0;
    for (int iter = 0; hi - lo > settings_.jump_time_tol; ++iter) {
      double x = (iter % 4 == 3) ? 0.5 * (lo + hi) : lo + (hi - lo) * f_lo / (f_lo - f_hi);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
      trial = lo_state;
      propagate(trial, x - lo);
      const double f_x = std::log(trial.squaredNorm() / r);
      const double slope = (f_lo - f_hi) / (hi - lo);
      if (std::abs(f_x) <= slope * settings_.jump_time_tol) {
        hi = x;
        psi.swap(trial);
        break;
      }
      if (f_x > 0.0) {
        lo = x;
        f_lo = f_x;
        lo_state.swap(trial);
        if (side == 1) f_hi *= 0.5;
        side = 1;
      } else {
        hi = x;
        f_hi = f_x;
        psi.swap(trial);
        if (side == -1) f_lo *= 0.5;
        side = -1;
      }
    }
    t += hi;  // psi holds the state at hi

    double total = 0.0;
    std::vector<double> weights(collapse_.size());
    for (std::size_t k = 0; k < collapse_.size(); ++k) {
      scratch.noalias() = collapse_[k] * psi;
      weights[k] = scratch.squaredNorm();
      total += weights[k];
    }
    if (!(total > 0.0)) {
      throw IntegrationError("trajectory: all jump weights vanish at t=" + std::to_string(t));
    }
    const double pick = uniform_open(rng) * total;
    std::size_t chosen = collapse_.size() - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < collapse_.size(); ++k) {
      acc += weights[k];
      if (pick < acc) {
        chosen = k;
        break;
      }
    }
    scratch.noalias() = collapse_[chosen] * psi;
    psi = scratch / std::sqrt(weights[chosen]);
    if (jumps) jumps->push_back({t, chosen});
    r = uniform_open(rng);
  }
  psi.normalize();
  return psi;
}

StateVector advance_trajectory(const StateVector& psi, double t0, double t1, const EmbeddedOperator& H_eff,
                               const std::vector<CollapseOperator>& collapse, std::mt19937_64& rng,
                               const TrajectorySettings& settings, std::vector<JumpEvent>* jumps) {
  const TrajectoryStepper stepper(H_eff, collapse, settings);
  return stepper.advance(psi, t0, t1, rng, jumps);
}

namespace {

// Per-trajectory samples, laid out [sample][N_0..N_{M-1}, sz_0.., top_0..].
struct TrajectorySamples {
  std::vector<double> values;
  std::size_t jumps = 0;
  double norm_error = 0.0;
};

}  // namespace

TrajectoryEnsembleResult run_ensemble(const ProductStateSpec& spec, const LatticeConfig& config,
                                      const TrajectorySettings& settings, const EvolutionSettings& evo) {
  config.validate();
  settings.validate();
  evo.validate();

  const auto H = build_hamiltonian(config);
  const auto collapse = build_collapse_operators(config);
  const auto H_eff = effective_hamiltonian(H, collapse);
  const TrajectoryStepper stepper(H_eff, collapse, settings);
  const StateVector psi0 = product_state(spec, config);
  const auto diag = site_diagonals(config);
  const auto grid = sample_grid(evo.t_max, evo.sample_dt);
  const std::size_t M = config.M;
  const std::size_t stride = 3 * M;
  const std::size_t n = settings.n_traj;

  std::vector<TrajectorySamples> runs(n);
  parallel_for(n, settings.workers, [&](std::size_t k) {
    auto& out = runs[k];
    out.values.resize(grid.size() * stride);
    std::mt19937_64 rng(settings.base_seed + k);
    std::vector<JumpEvent> jumps;
    StateVector psi = psi0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
      try {
        if (s > 0) psi = stepper.advance(psi, grid[s - 1], grid[s], rng, &jumps);
      } catch (const Error& e) {
        throw IntegrationError("trajectory " + std::to_string(k) + ": " + e.what());
      }
      out.norm_error = std::max(out.norm_error, std::abs(psi.norm() - 1.0));
      const Eigen::VectorXd p = psi.cwiseAbs2();
      double* row = out.values.data() + s * stride;
      for (std::size_t i = 0; i < M; ++i) {
        row[i] = p.dot(diag.n[i]);
        row[M + i] = p.dot(diag.sz[i]);
        row[2 * M + i] = p.dot(diag.top_level[i]);
      }
    }
    out.jumps = jumps.size();
  });

  TrajectoryEnsembleResult result;
  auto& ts = result.series;
  auto& dg = result.diagnostics;
  ts.M = M;
  ts.has_stderr = true;
  for (std::size_t k = 0; k < n; ++k) {
    dg.total_jumps += runs[k].jumps;
    dg.jumps_per_trajectory.push_back(runs[k].jumps);
    dg.max_norm_error = std::max(dg.max_norm_error, runs[k].norm_error);
  }

  const double nd = static_cast<double>(n);
  auto mean_err = [&](std::size_t s, std::size_t col) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += runs[k].values[s * stride + col];
    const double mean = sum / nd;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dv = runs[k].values[s * stride + col] - mean;
      ss += dv * dv;
    }
    const double err = n > 1 ? std::sqrt(ss / (nd * (nd - 1.0))) : 0.0;
    return std::pair{mean, err};
  };

  for (std::size_t s = 0; s < grid.size(); ++s) {
    std::vector<double> N(M), Ne(M), sz(M), sze(M);
    for (std::size_t i = 0; i < M; ++i) {
      std::tie(N[i], Ne[i]) = mean_err(s, i);
      std::tie(sz[i], sze[i]) = mean_err(s, M + i);
      const double top = mean_err(s, 2 * M + i).first;
      dg.truncation_peak = std::max(dg.truncation_peak, top);
      if (top > evo.truncation_tol) {
        std::size_t worst = 0;
        for (std::size_t k = 1; k < n; ++k) {
          if (runs[k].values[s * stride + 2 * M + i] > runs[worst].values[s * stride + 2 * M + i]) worst = k;
        }
        throw TruncationError("site " + std::to_string(i) + " mean top Fock level population " + std::to_string(top) +
                              " exceeds truncation_tol at t=" + std::to_string(grid[s]) + " (largest in trajectory " +
                              std::to_string(worst) + "); raise the cutoff");
      }
    }

    std::optional<double> z = imbalance(N, evo.population_threshold);
    std::optional<double> z_err;
    if (z) {
      double total = 0.0;
      for (double v : N) total += std::max(v, 0.0);
      double ss = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          const double v = runs[k].values[s * stride + i];
          a += (i % 2 == 0 ? v : -v);
          b += v;
        }
        const double dv = a - *z * b;
        ss += dv * dv;
      }
      z_err = n > 1 ? std::sqrt(ss / (nd * (nd - 1.0))) / total : 0.0;
    }

    ts.times.push_back(grid[s]);
    ts.N.push_back(std::move(N));
    ts.N_err.push_back(std::move(Ne));
    ts.sz.push_back(std::move(sz));
    ts.sz_err.push_back(std::move(sze));
    ts.z.push_back(z);
    ts.z_err.push_back(z_err);
    ts.precision_limited.push_back(false);
  }
  return result;
}

}  // namespace jcarray
