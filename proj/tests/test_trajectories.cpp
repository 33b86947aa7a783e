#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "jcarray/master.hpp"
#include "jcarray/trajectories.hpp"

using namespace jcarray;

namespace {

LatticeConfig lossy_cavity(double kappa, int n_max) {
  LatticeConfig c = make_uniform_chain(1, 0.0, 0.0, kappa, 0.0, n_max);
  c.qubit_omitted = {true};
  return c;
}

LatticeConfig driven_dimer() {
  LatticeConfig c;
  c.M = 2;
  c.n_max = 4;
  c.g = {1.5, 0.8};
  c.d = {0.3, 0.0};
  c.kappa = 0.2;
  c.gamma = 0.15;
  return c;
}

}  // namespace

TEST_CASE("uniform_open stays inside the open interval and is seeded") {
  std::mt19937_64 a(7), b(7);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open(a);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    CHECK(u == uniform_open(b));
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("effective Hamiltonian adds the anti-Hermitian decay part") {
  const LatticeConfig c = driven_dimer();
  const auto H = build_hamiltonian(c);
  const auto coll = build_collapse_operators(c);
  Eigen::MatrixXcd ref = Eigen::MatrixXcd(H.matrix);
  for (const auto& op : coll) {
    const Eigen::MatrixXcd m(op.matrix);
    ref -= Complex(0.0, 0.5) * m.adjoint() * m;
  }
  CHECK((Eigen::MatrixXcd(effective_hamiltonian(H, coll).matrix) - ref).norm() < 1e-13);
}

TEST_CASE("without dissipation a trajectory is the unitary evolution") {
  LatticeConfig c = driven_dimer();
  c.kappa = c.gamma = 0.0;
  const auto H = build_hamiltonian(c);
  const auto coll = build_collapse_operators(c);
  REQUIRE(coll.empty());
  const StateVector psi = product_state({{2, 0}, {QubitState::down, QubitState::up}, PhotonKind::fock}, c);
  std::mt19937_64 rng(3);
  std::vector<JumpEvent> jumps;
  const StateVector out = advance_trajectory(psi, 0.0, 6.0, effective_hamiltonian(H, coll), coll, rng, {}, &jumps);
  const Eigen::MatrixXcd u = (Complex(0.0, -6.0) * Eigen::MatrixXcd(H.matrix)).exp();
  CHECK(jumps.empty());
  CHECK((out - u * psi).norm() < 1e-10);
}

TEST_CASE("single-photon decay: jump statistics and ensemble mean") {
  const double kappa = 0.1;
  const LatticeConfig c = lossy_cavity(kappa, 2);
  const auto H = build_hamiltonian(c);
  const auto coll = build_collapse_operators(c);
  const auto heff = effective_hamiltonian(H, coll);
  const StateVector psi = product_state({{1}, {QubitState::down}, PhotonKind::fock}, c);

  TrajectorySettings ts;
  TrajectoryStepper stepper(heff, coll, ts);
  const int n = 4000;
  int jumped = 0;
  double worst_time_error = 0.0;
  for (int k = 0; k < n; ++k) {
    std::mt19937_64 rng(1000 + k);
    std::mt19937_64 probe(1000 + k);
    const double r = uniform_open(probe);
    std::vector<JumpEvent> jumps;
    stepper.advance(psi, 0.0, 10.0, rng, &jumps);
    REQUIRE(jumps.size() <= 1);
    if (!jumps.empty()) {
      ++jumped;
      // ||psi(t)||^2 = exp(-kappa t) crosses r at -ln(r)/kappa.
      worst_time_error = std::max(worst_time_error, std::abs(jumps[0].time + std::log(r) / kappa));
    }
  }
  const double p = 1.0 - std::exp(-kappa * 10.0);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(double(jumped) / n - p) < 3.0 * sigma);
  CHECK(worst_time_error < 1e-5);

  EvolutionSettings evo;
  evo.t_max = 30.0;
  evo.sample_dt = 1.0;
  ts.n_traj = 2000;
  ts.base_seed = 11;
  ts.workers = 2;
  const auto r = run_ensemble({{1}, {QubitState::down}, PhotonKind::fock}, c, ts, evo);
  for (std::size_t s = 1; s < r.series.size(); ++s) {
    const double exact = std::exp(-kappa * r.series.times[s]);
    const double se = r.series.N_err[s][0];
    CHECK(se > 0.0);
    CHECK(std::abs(r.series.N[s][0] - exact) < 4.0 * se);
    // Bernoulli standard error with the sample mean.
    const double m = r.series.N[s][0];
    CHECK(std::abs(se - std::sqrt(m * (1.0 - m) / (ts.n_traj - 1))) < 1e-12);
  }
}

TEST_CASE("standard error shrinks as one over root n") {
  const LatticeConfig c = driven_dimer();
  EvolutionSettings evo;
  evo.t_max = 10.0;
  evo.sample_dt = 5.0;
  evo.truncation_tol = 1.0;
  TrajectorySettings ts;
  ts.base_seed = 5;
  ts.workers = 2;
  const ProductStateSpec spec{{1, 0}, {QubitState::down, QubitState::down}, PhotonKind::fock};
  ts.n_traj = 200;
  const auto small = run_ensemble(spec, c, ts, evo);
  ts.n_traj = 800;
  const auto large = run_ensemble(spec, c, ts, evo);
  const double ratio = small.series.N_err.back()[0] / large.series.N_err.back()[0];
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("ensemble output does not depend on the worker count") {
  const LatticeConfig c = driven_dimer();
  EvolutionSettings evo;
  evo.t_max = 8.0;
  evo.truncation_tol = 1.0;
  TrajectorySettings ts;
  ts.n_traj = 24;
  ts.base_seed = 42;
  const ProductStateSpec spec{{2, 0}, {QubitState::up, QubitState::down}, PhotonKind::fock};
  ts.workers = 1;
  const auto a = run_ensemble(spec, c, ts, evo);
  ts.workers = 3;
  const auto b = run_ensemble(spec, c, ts, evo);
  CHECK(a.series.N == b.series.N);
  CHECK(a.series.sz == b.series.sz);
  CHECK(a.series.N_err == b.series.N_err);
  CHECK(a.diagnostics.jumps_per_trajectory == b.diagnostics.jumps_per_trajectory);
}

TEST_CASE("trajectory ensemble reproduces the master equation") {
  LatticeConfig c = driven_dimer();
  c.n_max = 7;
  const ProductStateSpec spec{{2, 0}, {QubitState::down, QubitState::up}, PhotonKind::fock};
  EvolutionSettings evo;
  evo.t_max = 12.0;
  evo.sample_dt = 2.0;
  evo.truncation_tol = 1e-2;
  const auto exact = evolve_master(DensityMatrix::pure(product_state(spec, c)), c, evo);
  TrajectorySettings ts;
  ts.n_traj = 1500;
  ts.base_seed = 77;
  ts.workers = 2;
  const auto traj = run_ensemble(spec, c, ts, evo);
  REQUIRE(traj.series.size() == exact.series.size());
  for (std::size_t s = 1; s < exact.series.size(); ++s) {
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(traj.series.N[s][i] - exact.series.N[s][i]) < 4.0 * traj.series.N_err[s][i] + 1e-9);
      CHECK(std::abs(traj.series.sz[s][i] - exact.series.sz[s][i]) < 4.0 * traj.series.sz_err[s][i] + 1e-9);
    }
  }
  CHECK(traj.diagnostics.max_norm_error < 1e-8);
}

TEST_CASE("Chebyshev and RK45 trajectories follow the same jump record") {
  const LatticeConfig c = driven_dimer();
  const auto H = build_hamiltonian(c);
  const auto coll = build_collapse_operators(c);
  const auto heff = effective_hamiltonian(H, coll);
  const StateVector psi = product_state({{1, 0}, {QubitState::up, QubitState::down}, PhotonKind::fock}, c);
  TrajectorySettings ts;
  ts.jump_time_tol = 1e-9;
  std::mt19937_64 r1(9), r2(9);
  std::vector<JumpEvent> j1, j2;
  const StateVector a = advance_trajectory(psi, 0.0, 20.0, heff, coll, r1, ts, &j1);
  ts.integrator = Integrator::rk45;
  ts.rtol = 1e-11;
  ts.atol = 1e-13;
  const StateVector b = advance_trajectory(psi, 0.0, 20.0, heff, coll, r2, ts, &j2);
  REQUIRE(j1.size() == j2.size());
  REQUIRE(!j1.empty());
  for (std::size_t k = 0; k < j1.size(); ++k) {
    CHECK(j1[k].channel == j2[k].channel);
    CHECK(std::abs(j1[k].time - j2[k].time) < 1e-6);
  }
  CHECK((a - b).norm() < 1e-5);
}

TEST_CASE("settings validation") {
  TrajectorySettings ts;
  ts.n_traj = 0;
  CHECK_THROWS_AS(ts.validate(), ValidationError);
}
