#pragma once

#include <filesystem>
#include <string>

#include "jcarray/analysis.hpp"
#include "jcarray/timeseries.hpp"

namespace jcarray {

/// printf %.17g: 17 significant digits, enough to round-trip a double.
std::string format_number(double x);

/// Header t, N_1..N_M, sz_1..sz_M, z, then g2_1..g2_M when recorded, then
/// N_err_1..N_err_M, sz_err_1..sz_err_M, z_err for ensemble results. Missing
/// values are empty fields.
std::string timeseries_csv(const TimeSeries& series);
void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path);

/// Columns d1, axis2_value, stable, t_break, z_long, one row per cell in
/// row-major order.
std::string phase_csv(const PhaseDiagramGrid& grid);

/// Columns d1, kappa.
std::string boundary_csv(const BoundaryCurve& curve);

/// Writes text to path, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace jcarray
