#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace jcarray {

/// Sampled observables on a uniform time grid. Rows are samples, inner
/// vectors are sites. Missing values (undefined ratios) are empty optionals.
struct TimeSeries {
  std::size_t M = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> N;
  std::vector<std::vector<double>> sz;
  std::vector<std::optional<double>> z;

  bool has_g2 = false;
  std::vector<std::vector<std::optional<double>>> g2;

  // Standard errors of the mean; populated by trajectory ensembles only.
  bool has_stderr = false;
  std::vector<std::vector<double>> N_err;
  std::vector<std::vector<double>> sz_err;
  std::vector<std::optional<double>> z_err;

  // Set on samples taken after the integrator hit its step-size floor.
  std::vector<bool> precision_limited;

  std::size_t size() const { return times.size(); }
  double total_photons(std::size_t sample) const;
  std::vector<double> column_N(std::size_t site) const;
  std::vector<double> column_sz(std::size_t site) const;
};

/// Population imbalance sum (-1)^i N_i / sum N_i (site 0 counts positive).
/// Empty when the total population is at or below `threshold`.
std::optional<double> imbalance(const std::vector<double>& N, double threshold = 1e-10);

/// Grid t_k = k * dt for k = 0..floor(t_max/dt + tiny), with t_max appended
/// when it is not on the grid.
std::vector<double> sample_grid(double t_max, double dt);

}  // namespace jcarray
