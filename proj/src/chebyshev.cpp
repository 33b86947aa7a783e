#include "jcarray/chebyshev.hpp"

#include <algorithm>
#include <random>

namespace jcarray {

std::vector<double> bessel_j_sequence(int kmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(kmax + 1), 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);
  const int start = kmax + 40 + static_cast<int>(std::sqrt(40.0 * (kmax + ax)));
  std::vector<double> j(static_cast<std::size_t>(start + 2), 0.0);
  j[static_cast<std::size_t>(start)] = 1e-300;
  for (int k = start; k >= 1; --k) {
    j[static_cast<std::size_t>(k - 1)] = (2.0 * k / ax) * j[static_cast<std::size_t>(k)] - j[static_cast<std::size_t>(k + 1)];
    if (std::abs(j[static_cast<std::size_t>(k - 1)]) > 1e250) {
      for (int m = k - 1; m <= start; ++m) j[static_cast<std::size_t>(m)] *= 1e-250;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[static_cast<std::size_t>(k)];
  for (int k = 0; k <= kmax; ++k) {
    double v = j[static_cast<std::size_t>(k)] / norm;
    if (x < 0.0 && (k % 2 == 1)) v = -v;
    out[static_cast<std::size_t>(k)] = v;
  }
  return out;
}

SpectralBounds gershgorin_bounds(const SparseMatrix& h) {
  SpectralBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
    double center = 0.0, radius = 0.0;
    for (SparseMatrix::InnerIterator it(h, r); it; ++it) {
      if (it.col() == it.row()) {
        center = it.value().real();
      } else {
        radius += std::abs(it.value());
      }
    }
    b.lower = std::min(b.lower, center - radius);
    b.upper = std::max(b.upper, center + radius);
  }
  if (h.rows() == 0) b = {0.0, 0.0};
  return b;
}

SpectralBounds hermitian_bounds(const SparseMatrix& h, int lanczos_steps) {
  const auto n = h.rows();
  const SpectralBounds gersh = gershgorin_bounds(h);
  if (n <= 1) return gersh;
  const int m = static_cast<int>(std::min<Eigen::Index>(lanczos_steps, n));

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  StateVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  v.normalize();

  std::vector<double> alpha, beta;
  std::vector<StateVector> basis{v};
  StateVector w(n), prev = StateVector::Zero(n);
  double last_beta = 0.0;
  for (int k = 0; k < m; ++k) {
    w.noalias() = h * basis.back();
    const double a = basis.back().dot(w).real();
    w -= a * basis.back();
    if (k > 0) w -= beta.back() * basis[basis.size() - 2];
    // Full reorthogonalization; m is small.
    for (const auto& q : basis) w -= q.dot(w) * q;
    alpha.push_back(a);
    last_beta = w.norm();
    if (k + 1 == m || last_beta < 1e-12) break;
    beta.push_back(last_beta);
    basis.push_back(w / last_beta);
  }

  const auto k = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0) - last_beta;
  const double hi = es.eigenvalues()(k - 1) + last_beta;
  return {std::max(lo, gersh.lower), std::min(hi, gersh.upper)};
}

}  // namespace jcarray
