#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "jcarray/types.hpp"

namespace jcarray {

struct Dopri5Options {
  double rtol = 1e-6;
  double atol = 1e-9;
  double h_init = 0.0;  // 0 selects the starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  // Steps smaller than h_min_rel * max(|t|, 1) count as step-size underflow.
  double h_min_rel = 1e-12;
  long max_steps = 200'000'000;
};

struct Dopri5Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  long underflow_steps = 0;
  std::optional<double> first_underflow_time;
};

/// Weighted RMS error norm used by the step controller; works for any Eigen
/// dense vector or matrix with real or complex coefficients.
template <class State>
double scaled_error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  const auto scale = atol + rtol * y0.array().abs().max(y1.array().abs());
  const double sum = (err.array().abs() / scale).square().sum();
  return std::sqrt(sum / static_cast<double>(err.size()));
}

/// Dormand-Prince 5(4) with FSAL, PI step control, and exact landing on the
/// requested output times. When the controller asks for a step below the
/// underflow limit the step is taken anyway at that limit and counted in
/// the stats, so the caller decides whether that is fatal.
template <class State>
class Dopri5 {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;

  Dopri5(Rhs rhs, Dopri5Options options) : rhs_(std::move(rhs)), opt_(options) {}

  void reset(double t, const State& y) {
    t_ = t;
    y_ = y;
    k1_.resize(y.rows(), y.cols());
    eval(t_, y_, k1_);
    h_ = opt_.h_init > 0.0 ? opt_.h_init : initial_step();
    err_prev_ = 1e-4;
  }

  double time() const { return t_; }
  const State& state() const { return y_; }
  State& mutable_state() { return y_; }
  const Dopri5Stats& stats() const { return stats_; }

  /// Re-evaluates the cached derivative after the caller edited the state.
  void state_modified() { eval(t_, y_, k1_); }

  void advance_to(double t_end) {
    if (t_end < t_) throw IntegrationError("Dopri5: cannot integrate backwards");
    while (t_ < t_end) {
      if (stats_.accepted + stats_.rejected >= opt_.max_steps) {
        throw IntegrationError("Dopri5: step budget exhausted at t=" + std::to_string(t_));
      }
      const double h_floor = opt_.h_min_rel * std::max(std::abs(t_), 1.0);
      double h = std::min({h_, opt_.h_max, t_end - t_});
      const bool lands = (t_end - t_) <= h * (1.0 + 1e-12);
      bool forced = false;
      if (h < h_floor && !lands) {
        h = h_floor;
        forced = true;
      }
      const double err = attempt(h);
      if (!std::isfinite(err)) {
        if (forced) throw IntegrationError("Dopri5: non-finite state at t=" + std::to_string(t_));
        ++stats_.rejected;
        h_ = 0.25 * h;
        continue;
      }
      if (err <= 1.0 || forced) {
        if (forced) {
          ++stats_.underflow_steps;
          if (!stats_.first_underflow_time) stats_.first_underflow_time = t_;
        }
        t_ = lands ? t_end : t_ + h;
        y_.swap(y_new_);
        k1_.swap(k7_);
        ++stats_.accepted;
        // PI controller (Hairer & Wanner, beta = 0.04).
        const double e = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev_, 0.04);
        fac = std::clamp(fac, 0.2, 10.0);
        err_prev_ = e;
        const double h_next = h * fac;
        // A step clipped to land on t_end should not shrink the next one.
        h_ = lands ? std::max(h_, h_next) : h_next;
      } else {
        ++stats_.rejected;
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
  }

 private:
  void eval(double t, const State& y, State& out) {
    rhs_(t, y, out);
    ++stats_.rhs_evaluations;
  }

  double initial_step() {
    const auto sc = opt_.atol + opt_.rtol * y_.array().abs();
    const double d0 = std::sqrt((y_.array().abs() / sc).square().mean());
    const double d1 = std::sqrt((k1_.array().abs() / sc).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    State y1 = y_ + h0 * k1_;
    State f1(y_.rows(), y_.cols());
    eval(t_ + h0, y1, f1);
    const double d2 = std::sqrt((((f1 - k1_).array().abs()) / sc).square().mean()) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, opt_.h_max});
  }

  double attempt(double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    tmp_ = y_ + (h * a21) * k1_;
    k2_.resize(y_.rows(), y_.cols());
    eval(t_ + c2 * h, tmp_, k2_);
    tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    k3_.resize(y_.rows(), y_.cols());
    eval(t_ + c3 * h, tmp_, k3_);
    tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    k4_.resize(y_.rows(), y_.cols());
    eval(t_ + c4 * h, tmp_, k4_);
    tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    k5_.resize(y_.rows(), y_.cols());
    eval(t_ + c5 * h, tmp_, k5_);
    tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    k6_.resize(y_.rows(), y_.cols());
    eval(t_ + h, tmp_, k6_);
    y_new_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    k7_.resize(y_.rows(), y_.cols());
    eval(t_ + h, y_new_, k7_);
    tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    return scaled_error_norm(tmp_, y_, y_new_, opt_.rtol, opt_.atol);
  }

  Rhs rhs_;
  Dopri5Options opt_;
  Dopri5Stats stats_;
  double t_ = 0.0;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  State y_, y_new_, tmp_, k1_, k2_, k3_, k4_, k5_, k6_, k7_;
};

}  // namespace jcarray
