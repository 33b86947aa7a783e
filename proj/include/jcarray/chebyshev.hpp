#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "jcarray/types.hpp"

namespace jcarray {

/// Bessel functions J_0(x) .. J_kmax(x) by Miller's backward recurrence,
/// normalized with J_0 + 2 sum J_2k = 1.
std::vector<double> bessel_j_sequence(int kmax, double x);

/// Spectral enclosure [lower, upper] of a Hermitian sparse matrix from a
/// short Lanczos run. The bounds are Ritz extremes widened by the final
/// residual norm, then clipped to the Gershgorin interval.
struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  double center() const { return 0.5 * (upper + lower); }
  double half_width() const { return 0.5 * (upper - lower); }
};

SpectralBounds hermitian_bounds(const SparseMatrix& h, int lanczos_steps = 40);
SpectralBounds gershgorin_bounds(const SparseMatrix& h);

struct ChebyshevOptions {
  // Largest scaled time w*dt handled by one expansion; longer intervals are
  // split. Keeps growth of T_k off the real axis bounded for weakly
  // non-normal generators.
  double max_tau = 100.0;
  // Coefficients below this magnitude end the series.
  double coefficient_tol = 1e-16;
};

/// Propagates v <- exp(-i G t) v for a linear generator G whose spectrum lies
/// in [center - half_width, center + half_width] up to a small non-positive
/// imaginary part (damping).
///
/// `apply(in, parity, out)` must write G(in) into out. `parity` is the
/// Hermiticity sign of `in` (+1 Hermitian, -1 anti-Hermitian) for matrix
/// states evolved by Liouvillians; vector users can ignore it.
template <class State>
class ChebyshevPropagator {
 public:
  using Apply = std::function<void(const State&, int, State&)>;

  ChebyshevPropagator(Apply apply, double center, double half_width, ChebyshevOptions options = {})
      : apply_(std::move(apply)), center_(center), width_(half_width), opt_(options) {
    if (!(width_ > 0.0)) throw ValidationError("Chebyshev propagator: spectral half-width must be positive");
  }

  long applications() const { return applications_; }
  double half_width() const { return width_; }

  void propagate(State& v, double dt, int parity = 1) const {
    if (dt < 0.0) throw IntegrationError("Chebyshev propagator: negative time step");
    if (dt == 0.0) return;
    const int pieces = static_cast<int>(std::ceil(width_ * dt / opt_.max_tau));
    const double h = dt / pieces;
    for (int p = 0; p < pieces; ++p) single(v, h, parity);
  }

 private:
  // out = (G(in) - center*in) / width, tracking parity of G(in).
  void scaled(const State& in, int parity, State& out) const {
    apply_(in, parity, out);
    ++applications_;
    if (center_ != 0.0) out -= center_ * in;
    out /= width_;
  }

  void single(State& v, double h, int parity) const {
    const double tau = width_ * h;
    const int kmax = static_cast<int>(std::ceil(tau + 10.0 * std::cbrt(tau + 1.0) + 20.0));
    const auto bessel = bessel_j_sequence(kmax, tau);
    int kend = kmax;
    while (kend > 1 && std::abs(bessel[kend]) < opt_.coefficient_tol) --kend;

    // (-i)^k factors. Multiplying by i flips Hermitian <-> anti-Hermitian,
    // so T_k(A) v carries parity parity * (-1)^k when A = G/width maps
    // Hermitian to anti-Hermitian. With a nonzero center (vector use)
    // parity is meaningless and ignored by the callee.
    const double two_over_w = 2.0 / width_;
    const double shift = 2.0 * center_ / width_;
    State prev = v;
    State curr(v.rows(), v.cols());
    scaled(prev, parity, curr);
    State acc = bessel[0] * prev + (2.0 * bessel[1] * Complex(0.0, -1.0)) * curr;
    State next(v.rows(), v.cols());
    Complex phase(0.0, -1.0);
    int curr_parity = -parity;
    for (int k = 2; k <= kend; ++k) {
      // T_{k+1} = 2 A T_k - T_{k-1} with A = (G - center) / width.
      apply_(curr, curr_parity, next);
      ++applications_;
      if (center_ != 0.0) {
        next = two_over_w * next - shift * curr - prev;
      } else {
        next = two_over_w * next - prev;
      }
      phase *= Complex(0.0, -1.0);
      acc += (2.0 * bessel[k] * phase) * next;
      prev.swap(curr);
      curr.swap(next);
      curr_parity = -curr_parity;
    }
    if (center_ != 0.0) acc *= std::exp(Complex(0.0, -center_ * h));
    v.swap(acc);
  }

  Apply apply_;
  double center_;
  double width_;
  ChebyshevOptions opt_;
  mutable long applications_ = 0;
};

}  // namespace jcarray
