#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jcarray/lattice.hpp"
#include "jcarray/meanfield.hpp"
#include "jcarray/timeseries.hpp"

namespace jcarray {

/// Closed-system localization threshold 2.8 sqrt(N) J.
double critical_coupling(double N, double J = 1.0);

struct BreakTimeResult {
  std::optional<double> t_break;
  std::optional<double> z_long;  // mean z over the final 10% of samples
  bool stable = true;            // == !t_break
};

/// Earliest sample time t with |z(t')| < theta |z(0)| for every sample t' in
/// [t, t + window]; the window has to close before the last sample. Samples
/// with undefined z or fewer than `min_population` photons in total count as
/// below threshold: an emptied array carries no localized light.
BreakTimeResult detect_t_break(const TimeSeries& series, double theta = 0.5, double window = 10.0,
                               double min_population = 0.0);

/// kappa(d1) = 2 sqrt(2.8^2 (d1/g)^2 - delta_q^2), empty when the radicand
/// is negative.
std::optional<double> analytic_boundary_kappa(double d1, double g, double delta_q);

/// Inverse of analytic_boundary_kappa: the drive at which the boundary
/// reaches `kappa`.
double analytic_boundary_drive(double kappa, double g, double delta_q);

struct BoundaryCurve {
  std::vector<double> d1;
  std::vector<double> kappa;
  double d1_min = 0.0;  // radicand root, kappa(d1_min) = 0
};

/// n samples of the analytic boundary on [max(d1_lo, d1_min), d1_hi].
BoundaryCurve boundary_curve(double g, double delta_q, double d1_lo, double d1_hi, std::size_t n);

enum class SweepAxis { kappa, gamma };

struct PhaseSweepSpec {
  LatticeConfig base;
  SemiclassicalState init;
  std::vector<double> d1;     // axis 1, drive on `drive_site`
  std::vector<double> axis2;  // kappa or gamma values
  SweepAxis axis2_kind = SweepAxis::kappa;
  std::size_t drive_site = 0;
  double horizon = 1400.0;
  double theta = 0.5;
  double window = 10.0;
  double min_population = 1e-2;
  MeanfieldSettings meanfield;  // t_max is replaced by horizon
  std::size_t workers = 0;
};

struct PhaseCell {
  double d1 = 0.0;
  double axis2 = 0.0;
  BreakTimeResult result;
  std::optional<std::string> error;  // integration failure, cell counted unstable
};

/// Stable band of one axis2 row: the longest run of consecutive stable cells
/// (the lowest one on ties). Edges are placed halfway between the last
/// unstable and the first stable cell; a band touching the end of the grid
/// reports the grid edge and sets the matching `censored` flag. Stable cells
/// outside the band are counted in `isolated` and clear `contiguous`.
struct BandRow {
  double axis2 = 0.0;
  std::optional<double> d1_min;
  std::optional<double> d1_max;
  bool min_censored = false;
  bool max_censored = false;
  bool contiguous = true;
  std::size_t isolated = 0;
};

struct PhaseDiagramGrid {
  std::vector<double> d1;
  std::vector<double> axis2;
  SweepAxis axis2_kind = SweepAxis::kappa;
  double horizon = 0.0;
  LatticeConfig base;
  std::vector<PhaseCell> cells;  // row-major: cells[j * d1.size() + i]
  std::vector<BandRow> rows;

  const PhaseCell& at(std::size_t i, std::size_t j) const { return cells.at(j * d1.size() + i); }
};

/// Stable bands from per-cell results already stored in grid.cells.
std::vector<BandRow> extract_bands(const PhaseDiagramGrid& grid);

/// One mean-field evolution and detect_t_break per cell, run in parallel.
PhaseDiagramGrid phase_sweep(const PhaseSweepSpec& spec);

struct BoundaryComparison {
  double max_deviation = 0.0;
  std::size_t rows_compared = 0;
  std::optional<double> worst_axis2;
};

/// Relative deviation |d1_max - d1_curve| / d1_curve for rows with axis2 in
/// [lo, hi], d1_curve interpolated on the curve at the row's kappa. A band
/// reaching the top of the grid only bounds d1_max from below and counts as
/// max(0, d1_max - d1_curve) / d1_curve. Rows without a stable cell count as
/// deviation 1.
BoundaryComparison compare_boundary(const PhaseDiagramGrid& grid, const BoundaryCurve& curve, double lo, double hi);

}  // namespace jcarray
