#include "jcarray/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jcarray/parallel.hpp"

namespace jcarray {

double critical_coupling(double N, double J) {
  if (!(N > 0.0)) throw ValidationError("N: must be positive");
  return 2.8 * std::sqrt(N) * J;
}

BreakTimeResult detect_t_break(const TimeSeries& series, double theta, double window, double min_population) {
  if (series.size() == 0) throw ValidationError("series: empty");
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta: must lie in (0, 1)");
  if (!(window >= 0.0)) throw ValidationError("window: must be non-negative");
  const double span = series.times.back() - series.times.front();
  if (span < window) throw ValidationError("series: shorter than the break-time window");
  if (!series.z.front()) throw ValidationError("series: z(0) undefined");

  const double threshold = theta * std::abs(*series.z.front());
  // Grid times carry round-off, so the window closes a hair early.
  const double slack = 1e-9 * std::max(1.0, window);

  BreakTimeResult out;
  std::optional<double> run_start;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& z = series.z[k];
    const bool low = !z || std::abs(*z) < threshold || series.total_photons(k) < min_population;
    if (!low) {
      run_start.reset();
      continue;
    }
    if (!run_start) run_start = series.times[k];
    if (series.times[k] - *run_start >= window - slack) {
      out.t_break = *run_start;
      break;
    }
  }
  out.stable = !out.t_break;

  const std::size_t n = series.size();
  const std::size_t tail = std::max<std::size_t>(1, (n + 9) / 10);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = n - tail; k < n; ++k) {
    if (series.z[k]) {
      sum += *series.z[k];
      ++count;
    }
  }
  if (count > 0) out.z_long = sum / static_cast<double>(count);
  return out;
}

std::optional<double> analytic_boundary_kappa(double d1, double g, double delta_q) {
  if (!(g > 0.0)) throw ValidationError("g: must be positive");
  const double r = 2.8 * d1 / g;
  const double radicand = r * r - delta_q * delta_q;
  // Round-off at the domain edge r = |delta_q| still maps to kappa = 0.
  if (radicand < -1e-12 * delta_q * delta_q) return std::nullopt;
  return 2.0 * std::sqrt(std::max(0.0, radicand));
}

double analytic_boundary_drive(double kappa, double g, double delta_q) {
  if (!(g > 0.0)) throw ValidationError("g: must be positive");
  if (!(kappa >= 0.0)) throw ValidationError("kappa: must be non-negative");
  return g / 2.8 * std::sqrt(0.25 * kappa * kappa + delta_q * delta_q);
}

BoundaryCurve boundary_curve(double g, double delta_q, double d1_lo, double d1_hi, std::size_t n) {
  if (n < 2) throw ValidationError("n: need at least two samples");
  BoundaryCurve c;
  c.d1_min = analytic_boundary_drive(0.0, g, delta_q);
  const double lo = std::max(d1_lo, c.d1_min);
  if (!(d1_hi > lo)) throw ValidationError("d1_hi: boundary domain is empty");
  for (std::size_t k = 0; k < n; ++k) {
    const double d1 = k + 1 == n ? d1_hi : lo + (d1_hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    c.d1.push_back(d1);
    // value_or covers round-off just below the domain edge.
    c.kappa.push_back(analytic_boundary_kappa(d1, g, delta_q).value_or(0.0));
  }
  return c;
}

std::vector<BandRow> extract_bands(const PhaseDiagramGrid& grid) {
  const std::size_t n1 = grid.d1.size();
  std::vector<BandRow> rows;
  for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
    BandRow row;
    row.axis2 = grid.axis2[j];
    // Longest run of stable cells, [first, last].
    std::optional<std::size_t> first, last;
    std::size_t stable_count = 0;
    for (std::size_t i = 0; i < n1;) {
      if (!grid.at(i, j).result.stable) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end + 1 < n1 && grid.at(end + 1, j).result.stable) ++end;
      stable_count += end - i + 1;
      if (!first || end - i > *last - *first) {
        first = i;
        last = end;
      }
      i = end + 1;
    }
    if (first) {
      row.isolated = stable_count - (*last - *first + 1);
      row.contiguous = row.isolated == 0;
      if (*first == 0) {
        row.d1_min = grid.d1.front();
        row.min_censored = true;
      } else {
        row.d1_min = 0.5 * (grid.d1[*first - 1] + grid.d1[*first]);
      }
      if (*last + 1 == n1) {
        row.d1_max = grid.d1.back();
        row.max_censored = true;
      } else {
        row.d1_max = 0.5 * (grid.d1[*last] + grid.d1[*last + 1]);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

PhaseDiagramGrid phase_sweep(const PhaseSweepSpec& spec) {
  if (spec.d1.empty()) throw ValidationError("d1: sweep grid is empty");
  if (spec.axis2.empty()) throw ValidationError("axis2: sweep grid is empty");
  if (spec.drive_site >= spec.base.M) throw ValidationError("drive_site: outside the lattice");
  if (!(spec.horizon > 0.0)) throw ValidationError("horizon: must be positive");
  if (spec.init.size() != spec.base.M) throw ValidationError("init: length differs from M");
  spec.base.validate();

  PhaseDiagramGrid grid;
  grid.d1 = spec.d1;
  grid.axis2 = spec.axis2;
  grid.axis2_kind = spec.axis2_kind;
  grid.horizon = spec.horizon;
  grid.base = spec.base;
  const std::size_t n1 = spec.d1.size();
  grid.cells.resize(n1 * spec.axis2.size());

  MeanfieldSettings ms = spec.meanfield;
  ms.t_max = spec.horizon;
  ms.validate();

  parallel_for(grid.cells.size(), spec.workers, [&](std::size_t idx) {
    PhaseCell& cell = grid.cells[idx];
    cell.d1 = spec.d1[idx % n1];
    cell.axis2 = spec.axis2[idx / n1];
    LatticeConfig c = spec.base;
    c.d[spec.drive_site] = cell.d1;
    (spec.axis2_kind == SweepAxis::kappa ? c.kappa : c.gamma) = cell.axis2;
    try {
      const auto r = evolve_meanfield(spec.init, c, ms);
      cell.result = detect_t_break(r.series, spec.theta, spec.window, spec.min_population);
    } catch (const Error& e) {
      cell.error = e.what();
      cell.result.stable = false;
    }
  });
  grid.rows = extract_bands(grid);
  return grid;
}

namespace {

std::optional<double> curve_drive_at(const BoundaryCurve& curve, double kappa) {
  for (std::size_t k = 0; k + 1 < curve.kappa.size(); ++k) {
    const double k0 = curve.kappa[k], k1 = curve.kappa[k + 1];
    if (kappa < k0 || kappa > k1) continue;
    if (k1 == k0) return curve.d1[k];
    const double w = (kappa - k0) / (k1 - k0);
    return curve.d1[k] + w * (curve.d1[k + 1] - curve.d1[k]);
  }
  return std::nullopt;
}

}  // namespace

BoundaryComparison compare_boundary(const PhaseDiagramGrid& grid, const BoundaryCurve& curve, double lo, double hi) {
  if (curve.d1.size() != curve.kappa.size() || curve.d1.size() < 2)
    throw ValidationError("curve: needs matching d1/kappa samples");
  BoundaryComparison out;
  for (const auto& row : grid.rows) {
    if (row.axis2 < lo || row.axis2 > hi) continue;
    const auto target = curve_drive_at(curve, row.axis2);
    if (!target) continue;
    double dev = 1.0;
    if (row.d1_max) {
      dev = row.max_censored ? std::max(0.0, *row.d1_max - *target) / *target
                             : std::abs(*row.d1_max - *target) / *target;
    }
    ++out.rows_compared;
    if (!out.worst_axis2 || dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_axis2 = row.axis2;
    }
  }
  if (out.rows_compared == 0) throw ValidationError("compare_boundary: grid rows and curve do not overlap");
  return out;
}

}  // namespace jcarray
