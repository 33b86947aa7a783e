#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "jcarray/chebyshev.hpp"
#include "jcarray/ode.hpp"

using namespace jcarray;

namespace {

Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("Bessel sequence matches the standard library") {
  for (double x : {0.0, 0.5, 3.0, 24.0, 100.0}) {
    const int kmax = static_cast<int>(x) + 40;
    const auto j = bessel_j_sequence(kmax, x);
    REQUIRE(j.size() == static_cast<std::size_t>(kmax + 1));
    for (int k = 0; k <= std::min(kmax, 60); ++k) {
      CHECK(std::abs(j[k] - std::cyl_bessel_j(double(k), x)) < 1e-13);
    }
  }
}

TEST_CASE("Lanczos bounds enclose the spectrum") {
  const Eigen::MatrixXcd h = random_hermitian(30, 3, 1.0);
  const SparseMatrix hs = h.sparseView();
  const auto b = hermitian_bounds(hs);
  const auto g = gershgorin_bounds(hs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  CHECK(b.lower <= es.eigenvalues().minCoeff() + 1e-12);
  CHECK(b.upper >= es.eigenvalues().maxCoeff() - 1e-12);
  CHECK(b.lower >= g.lower - 1e-12);
  CHECK(b.upper <= g.upper + 1e-12);
}

TEST_CASE("Chebyshev propagation matches the dense exponential") {
  const Eigen::MatrixXcd h = random_hermitian(20, 11, 2.0) + 0.7 * Eigen::MatrixXcd::Identity(20, 20);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  ChebyshevPropagator<Eigen::VectorXcd> prop(
      [&](const Eigen::VectorXcd& in, int, Eigen::VectorXcd& out) { out = h * in; }, 0.5 * (hi + lo),
      0.5 * (hi - lo) * 1.01);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(20);
  v(0) = 1.0;
  for (double t : {0.1, 1.0, 7.5}) {
    Eigen::VectorXcd w = v;
    prop.propagate(w, t);
    const Eigen::MatrixXcd u = (Complex(0.0, -t) * h).exp();
    CHECK((w - u * v).norm() < 1e-12);
  }
}

TEST_CASE("Chebyshev propagation with damping") {
  // exp(-i K t) with K = H - i Gamma, Gamma >= 0 diagonal.
  const Eigen::MatrixXcd h = random_hermitian(12, 5, 1.0);
  Eigen::MatrixXcd k = h;
  for (int i = 0; i < 12; ++i) k(i, i) -= Complex(0.0, 0.05 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  // Same widening as the trajectory stepper.
  ChebyshevPropagator<Eigen::VectorXcd> prop(
      [&](const Eigen::VectorXcd& in, int, Eigen::VectorXcd& out) { out = k * in; }, 0.5 * (hi + lo),
      1.05 * 0.5 * (hi - lo) + 0.5 * 0.55);
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(12) / std::sqrt(12.0);
  Eigen::VectorXcd w = v;
  prop.propagate(w, 30.0);
  const Eigen::MatrixXcd u = (Complex(0.0, -30.0) * k).exp();
  CHECK((w - u * v).norm() < 1e-10);
}

TEST_CASE("Dopri5 integrates an exponential to tolerance") {
  Dopri5Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  // Harmonic oscillator y0' = y1, y1' = -y0.
  Dopri5<Eigen::VectorXd> ode([](double, const Eigen::VectorXd& s, Eigen::VectorXd& d) {
    d.resize(2);
    d << s(1), -s(0);
  }, opt);
  ode.reset(0.0, y);
  ode.advance_to(10.0);
  CHECK(std::abs(ode.state()(0) - std::cos(10.0)) < 1e-8);
  CHECK(std::abs(ode.state()(1) + std::sin(10.0)) < 1e-8);
  CHECK_THROWS_AS(ode.advance_to(5.0), IntegrationError);
}
