#include "jcarray/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include "jcarray/types.hpp"

namespace jcarray {

double TimeSeries::total_photons(std::size_t sample) const {
  double s = 0.0;
  for (double n : N.at(sample)) s += n;
  return s;
}

std::vector<double> TimeSeries::column_N(std::size_t site) const {
  std::vector<double> out;
  out.reserve(N.size());
  for (const auto& row : N) out.push_back(row.at(site));
  return out;
}

std::vector<double> TimeSeries::column_sz(std::size_t site) const {
  std::vector<double> out;
  out.reserve(sz.size());
  for (const auto& row : sz) out.push_back(row.at(site));
  return out;
}

std::optional<double> imbalance(const std::vector<double>& N, double threshold) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < N.size(); ++i) {
    // Populations are non-negative; clip round-off so |z| <= 1 holds.
    const double n = std::max(N[i], 0.0);
    num += (i % 2 == 0 ? 1.0 : -1.0) * n;
    den += n;
  }
  if (!(den > threshold)) return std::nullopt;
  return num / den;
}

std::vector<double> sample_grid(double t_max, double dt) {
  if (!(t_max > 0.0)) throw ValidationError("t_max: must be positive");
  if (!(dt > 0.0)) throw ValidationError("sample_dt: must be positive");
  const auto n = static_cast<long>(std::floor(t_max / dt * (1.0 + 1e-12)));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n + 2));
  for (long k = 0; k <= n; ++k) grid.push_back(static_cast<double>(k) * dt);
  if (t_max - grid.back() > 1e-9 * dt) grid.push_back(t_max);
  return grid;
}

}  // namespace jcarray
