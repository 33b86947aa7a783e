#include "jcarray/meanfield.hpp"

#include <cmath>
#include <random>
#include <string>

namespace jcarray {

namespace {

// Packed layout: [Re a, Im a, Re s^-, Im s^-, s^z], each block of length M.
Eigen::VectorXd pack(const SemiclassicalState& s) {
  const auto M = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd y(5 * M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y(i) = s.alpha[k].real();
    y(M + i) = s.alpha[k].imag();
    y(2 * M + i) = s.sm[k].real();
    y(3 * M + i) = s.sm[k].imag();
    y(4 * M + i) = s.sz[k];
  }
  return y;
}

SemiclassicalState unpack(const Eigen::VectorXd& y, double time) {
  const Eigen::Index M = y.size() / 5;
  SemiclassicalState s;
  s.time = time;
  for (Eigen::Index i = 0; i < M; ++i) {
    s.alpha.emplace_back(y(i), y(M + i));
    s.sm.emplace_back(y(2 * M + i), y(3 * M + i));
    s.sz.push_back(y(4 * M + i));
  }
  return s;
}

class PackedRhs {
 public:
  explicit PackedRhs(const LatticeConfig& config) : c_(config), bonds_(config.bonds()) {}

  void operator()(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    const auto M = static_cast<Eigen::Index>(c_.M);
    dy.resize(y.size());
    for (Eigen::Index i = 0; i < M; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const Complex a(y(i), y(M + i));
      const Complex s(y(2 * M + i), y(3 * M + i));
      const double z = y(4 * M + i);
      const double g = c_.g[k];
      const Complex da = Complex(0.0, -c_.delta_c) * a + Complex(0.0, -g) * s - 0.5 * c_.kappa * a -
                         Complex(0.0, c_.d[k]);
      const Complex ds = Complex(0.0, -c_.delta_q) * s + Complex(0.0, 2.0 * g * z) * a - 0.5 * c_.gamma * s;
      // -i g (s^* a - a^* s) = 2 g Im(s^* a).
      const double dz = 2.0 * g * (std::conj(s) * a).imag() - c_.gamma * (z + 0.5);
      dy(i) = da.real();
      dy(M + i) = da.imag();
      dy(2 * M + i) = ds.real();
      dy(3 * M + i) = ds.imag();
      dy(4 * M + i) = dz;
    }
    // + i J a_j on site i for every bond (i, j).
    for (const auto& [i, j] : bonds_) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      dy(a) -= c_.J * y(M + b);
      dy(M + a) += c_.J * y(b);
      dy(b) -= c_.J * y(M + a);
      dy(M + b) += c_.J * y(a);
    }
  }

 private:
  const LatticeConfig& c_;
  std::vector<std::pair<std::size_t, std::size_t>> bonds_;
};

void check_sizes(const SemiclassicalState& s, const LatticeConfig& config) {
  if (s.alpha.size() != config.M || s.sm.size() != config.M || s.sz.size() != config.M) {
    throw ValidationError("semiclassical state: expected " + std::to_string(config.M) + " sites");
  }
}

}  // namespace

void MeanfieldSettings::validate() const {
  if (!(t_max > 0.0)) throw ValidationError("t_max: must be positive");
  if (!(sample_dt > 0.0)) throw ValidationError("sample_dt: must be positive");
  if (!(rtol > 0.0)) throw ValidationError("rtol: must be positive");
  if (!(atol > 0.0)) throw ValidationError("atol: must be positive");
}

SemiclassicalState meanfield_rhs(const SemiclassicalState& state, const LatticeConfig& config) {
  config.validate();
  check_sizes(state, config);
  const PackedRhs rhs(config);
  Eigen::VectorXd dy;
  rhs(pack(state), dy);
  return unpack(dy, state.time);
}

SemiclassicalState initial_state(const std::vector<double>& photons, const std::vector<double>& sz,
                                 const LatticeConfig& config) {
  if (photons.size() != config.M) throw ValidationError("photons: expected " + std::to_string(config.M) + " entries");
  if (sz.size() != config.M) throw ValidationError("sz: expected " + std::to_string(config.M) + " entries");
  SemiclassicalState s;
  for (std::size_t i = 0; i < config.M; ++i) {
    if (!(photons[i] >= 0.0)) {
      throw ValidationError("photons[" + std::to_string(i) + "]: must be non-negative");
    }
    if (!(sz[i] >= -0.5 && sz[i] <= 0.5)) throw ValidationError("sz[" + std::to_string(i) + "]: must lie in [-1/2, 1/2]");
    s.alpha.emplace_back(std::sqrt(photons[i]), 0.0);
    s.sm.emplace_back(0.0, 0.0);
    s.sz.push_back(sz[i]);
  }
  return s;
}

void perturb_coherences(SemiclassicalState& state, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& s : state.sm) {
    const double phi = 2.0 * M_PI * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    s += std::polar(amplitude, phi);
  }
}

MeanfieldResult evolve_meanfield(const SemiclassicalState& init, const LatticeConfig& config,
                                 const MeanfieldSettings& settings) {
  config.validate();
  settings.validate();
  check_sizes(init, config);

  const PackedRhs rhs(config);
  Dopri5Options opt;
  opt.rtol = settings.rtol;
  opt.atol = settings.atol;
  Dopri5<Eigen::VectorXd> ode([&rhs](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { rhs(y, dy); }, opt);

  const auto grid = sample_grid(settings.t_max, settings.sample_dt);
  MeanfieldResult result;
  auto& ts = result.series;
  ts.M = config.M;
  const auto M = static_cast<Eigen::Index>(config.M);

  auto record = [&](double t, const Eigen::VectorXd& y) {
    std::vector<double> N(config.M), sz(config.M);
    for (Eigen::Index i = 0; i < M; ++i) {
      N[static_cast<std::size_t>(i)] = y(i) * y(i) + y(M + i) * y(M + i);
      sz[static_cast<std::size_t>(i)] = y(4 * M + i);
    }
    ts.times.push_back(t);
    ts.z.push_back(imbalance(N, settings.population_threshold));
    ts.N.push_back(std::move(N));
    ts.sz.push_back(std::move(sz));
    ts.precision_limited.push_back(ode.stats().underflow_steps > 0);
  };

  ode.reset(init.time, pack(init));
  record(init.time, ode.state());
  for (std::size_t k = 1; k < grid.size(); ++k) {
    ode.advance_to(init.time + grid[k]);
    record(init.time + grid[k], ode.state());
  }
  result.final_state = unpack(ode.state(), ode.time());
  result.stats = ode.stats();
  return result;
}

}  // namespace jcarray
