#include "jcarray/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "jcarray/types.hpp"

namespace jcarray {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string timeseries_csv(const TimeSeries& s) {
  if (s.size() == 0) throw ValidationError("series: empty");
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 1; i <= s.M; ++i) out << ",N_" << i;
  for (std::size_t i = 1; i <= s.M; ++i) out << ",sz_" << i;
  out << ",z";
  if (s.has_g2)
    for (std::size_t i = 1; i <= s.M; ++i) out << ",g2_" << i;
  if (s.has_stderr) {
    for (std::size_t i = 1; i <= s.M; ++i) out << ",N_err_" << i;
    for (std::size_t i = 1; i <= s.M; ++i) out << ",sz_err_" << i;
    out << ",z_err";
  }
  out << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    out << format_number(s.times[k]);
    for (double v : s.N[k]) out << ',' << format_number(v);
    for (double v : s.sz[k]) out << ',' << format_number(v);
    out << ',' << optional_field(s.z[k]);
    if (s.has_g2)
      for (const auto& v : s.g2[k]) out << ',' << optional_field(v);
    if (s.has_stderr) {
      for (double v : s.N_err[k]) out << ',' << format_number(v);
      for (double v : s.sz_err[k]) out << ',' << format_number(v);
      out << ',' << optional_field(s.z_err[k]);
    }
    out << '\n';
  }
  return out.str();
}

void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path) {
  write_text(path, timeseries_csv(series));
}

std::string phase_csv(const PhaseDiagramGrid& grid) {
  std::ostringstream out;
  out << "d1,axis2_value,stable,t_break,z_long\n";
  for (const auto& c : grid.cells) {
    out << format_number(c.d1) << ',' << format_number(c.axis2) << ',' << (c.result.stable ? 1 : 0) << ','
        << optional_field(c.result.t_break) << ',' << optional_field(c.result.z_long) << '\n';
  }
  return out.str();
}

std::string boundary_csv(const BoundaryCurve& curve) {
  std::ostringstream out;
  out << "d1,kappa\n";
  for (std::size_t k = 0; k < curve.d1.size(); ++k)
    out << format_number(curve.d1[k]) << ',' << format_number(curve.kappa[k]) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path.string() + ": cannot open for writing");
  f << text;
  f.close();
  if (!f) throw IoError(path.string() + ": write failed");
}

}  // namespace jcarray
