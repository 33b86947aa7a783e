#include "jcarray/lattice.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace jcarray {

namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& entries) {
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

SparseMatrix identity(std::size_t dim) {
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setIdentity();
  return m;
}

std::string site_field(const char* name, std::size_t i) {
  std::ostringstream os;
  os << name << '[' << i << ']';
  return os.str();
}

}  // namespace

void LatticeConfig::validate() const {
  if (M < 1) throw ValidationError("M: site count must be at least 1");
  if (g.size() != M) throw ValidationError("g: expected " + std::to_string(M) + " entries, got " + std::to_string(g.size()));
  if (d.size() != M) throw ValidationError("d: expected " + std::to_string(M) + " entries, got " + std::to_string(d.size()));
  if (!(J > 0.0) || !std::isfinite(J)) throw ValidationError("J: hopping must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa: must be non-negative");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma: must be non-negative");
  if (!std::isfinite(delta_c)) throw ValidationError("delta_c: must be finite");
  if (!std::isfinite(delta_q)) throw ValidationError("delta_q: must be finite");
  if (n_max < 0) throw ValidationError("n_max: must be non-negative");
  if (!site_cutoffs.empty()) {
    if (site_cutoffs.size() != M) {
      throw ValidationError("site_cutoffs: expected " + std::to_string(M) + " entries, got " +
                            std::to_string(site_cutoffs.size()));
    }
    for (std::size_t i = 0; i < M; ++i) {
      if (site_cutoffs[i] < 0) throw ValidationError(site_field("site_cutoffs", i) + ": must be non-negative");
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    if (!std::isfinite(g[i])) throw ValidationError(site_field("g", i) + ": must be finite");
    if (!std::isfinite(d[i])) throw ValidationError(site_field("d", i) + ": must be finite");
  }
  if (!qubit_omitted.empty()) {
    if (qubit_omitted.size() != M) {
      throw ValidationError("qubit_omitted: expected " + std::to_string(M) + " entries, got " +
                            std::to_string(qubit_omitted.size()));
    }
    for (std::size_t i = 0; i < M; ++i) {
      if (qubit_omitted[i] && g[i] != 0.0) {
        throw ValidationError(site_field("qubit_omitted", i) + ": qubit is coupled (g != 0)");
      }
    }
  }
}

int LatticeConfig::cutoff(std::size_t site) const {
  return site_cutoffs.empty() ? n_max : site_cutoffs.at(site);
}

std::size_t LatticeConfig::dimension() const {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < M; ++i) dim *= site_dim(i);
  return dim;
}

bool LatticeConfig::uniform_cutoff() const {
  for (std::size_t i = 0; i < M; ++i) {
    if (cutoff(i) != cutoff(0)) return false;
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> LatticeConfig::bonds() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i + 1 < M; ++i) out.emplace_back(i, i + 1);
  if (periodic && M > 2) out.emplace_back(0, M - 1);
  return out;
}

LatticeConfig make_uniform_chain(std::size_t M, double g, double d, double kappa, double gamma, int n_max) {
  LatticeConfig c;
  c.M = M;
  c.g.assign(M, g);
  c.d.assign(M, d);
  c.kappa = kappa;
  c.gamma = gamma;
  c.n_max = n_max;
  return c;
}

LocalOperatorSet site_operators(int n_max, bool with_qubit) {
  if (n_max < 0) throw ValidationError("n_max: must be non-negative");
  const auto levels = static_cast<std::size_t>(n_max + 1);
  const std::size_t qubit = with_qubit ? 2 : 1;
  const std::size_t dim = qubit * levels;
  auto index = [qubit](std::size_t n, std::size_t q) { return static_cast<int>(qubit * n + q); };

  std::vector<Triplet> a, n, sm, sz;
  for (std::size_t k = 0; k < levels; ++k) {
    for (std::size_t q = 0; q < qubit; ++q) {
      if (k > 0) a.emplace_back(index(k - 1, q), index(k, q), std::sqrt(static_cast<double>(k)));
      if (k > 0) n.emplace_back(index(k, q), index(k, q), static_cast<double>(k));
      sz.emplace_back(index(k, q), index(k, q), q == 0 ? -0.5 : 0.5);
    }
    if (with_qubit) sm.emplace_back(index(k, 0), index(k, 1), 1.0);
  }

  LocalOperatorSet ops;
  ops.a = from_triplets(dim, dim, a);
  ops.a_dag = SparseMatrix(ops.a.adjoint());
  ops.n = from_triplets(dim, dim, n);
  ops.s_minus = from_triplets(dim, dim, sm);
  ops.s_plus = SparseMatrix(ops.s_minus.adjoint());
  ops.s_z = from_triplets(dim, dim, sz);
  ops.identity = identity(dim);
  return ops;
}

EmbeddedOperator embed_operator(const SparseMatrix& local, std::size_t site, const LatticeConfig& config) {
  if (site >= config.M) throw ValidationError("site index " + std::to_string(site) + " out of range");
  const std::size_t local_dim = config.site_dim(site);
  if (static_cast<std::size_t>(local.rows()) != local_dim || static_cast<std::size_t>(local.cols()) != local_dim) {
    throw ValidationError("embed_operator: local operator is " + std::to_string(local.rows()) + "x" +
                          std::to_string(local.cols()) + ", site " + std::to_string(site) + " has dimension " +
                          std::to_string(local_dim));
  }
  std::size_t left = 1;
  for (std::size_t i = 0; i < site; ++i) left *= config.site_dim(i);
  std::size_t right = 1;
  for (std::size_t i = site + 1; i < config.M; ++i) right *= config.site_dim(i);

  const std::size_t dim = left * local_dim * right;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(local.nonZeros()) * left * right);
  for (std::size_t l = 0; l < left; ++l) {
    for (Eigen::Index r = 0; r < local.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(local, r); it; ++it) {
        const std::size_t row0 = (l * local_dim + static_cast<std::size_t>(it.row())) * right;
        const std::size_t col0 = (l * local_dim + static_cast<std::size_t>(it.col())) * right;
        for (std::size_t q = 0; q < right; ++q) {
          entries.emplace_back(static_cast<int>(row0 + q), static_cast<int>(col0 + q), it.value());
        }
      }
    }
  }
  return {site, from_triplets(dim, dim, entries)};
}

EmbeddedOperator build_hamiltonian(const LatticeConfig& config) {
  config.validate();
  const std::size_t dim = config.dimension();
  SparseMatrix h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

  std::vector<SparseMatrix> a(config.M);
  for (std::size_t i = 0; i < config.M; ++i) {
    const auto ops = site_operators(config.cutoff(i), config.has_qubit(i));
    const SparseMatrix jc = ops.a_dag * ops.s_minus + ops.a * ops.s_plus;
    const SparseMatrix drive = ops.a + ops.a_dag;
    const SparseMatrix local = config.delta_q * ops.s_z + config.delta_c * ops.n + config.g[i] * jc + config.d[i] * drive;
    h += embed_operator(local, i, config).matrix;
    a[i] = embed_operator(ops.a, i, config).matrix;
  }
  for (const auto& [i, j] : config.bonds()) {
    const SparseMatrix hop = SparseMatrix(a[i].adjoint()) * a[j];
    h -= config.J * (hop + SparseMatrix(hop.adjoint()));
  }
  h.prune(Complex(0.0, 0.0));
  h.makeCompressed();
  return {std::nullopt, std::move(h)};
}

std::vector<CollapseOperator> build_collapse_operators(const LatticeConfig& config) {
  config.validate();
  std::vector<CollapseOperator> out;
  for (std::size_t i = 0; i < config.M; ++i) {
    const auto ops = site_operators(config.cutoff(i), config.has_qubit(i));
    if (config.kappa > 0.0) {
      out.push_back({Channel::photon_loss, i, config.kappa,
                     std::sqrt(config.kappa) * embed_operator(ops.a, i, config).matrix});
    }
    if (config.gamma > 0.0 && config.has_qubit(i)) {
      out.push_back({Channel::qubit_decay, i, config.gamma,
                     std::sqrt(config.gamma) * embed_operator(ops.s_minus, i, config).matrix});
    }
  }
  return out;
}

QubitState qubit_state_from_sz(double sz) {
  if (std::abs(sz + 0.5) < 1e-12) return QubitState::down;
  if (std::abs(sz - 0.5) < 1e-12) return QubitState::up;
  if (std::abs(sz) < 1e-12) return QubitState::superposition;
  throw ValidationError("qubit s^z must be -0.5, 0.5 or 0 (superposition), got " + std::to_string(sz));
}

double qubit_state_sz(QubitState q) {
  switch (q) {
    case QubitState::down: return -0.5;
    case QubitState::up: return 0.5;
    case QubitState::superposition: return 0.0;
  }
  return 0.0;
}

StateVector product_state(const ProductStateSpec& spec, const LatticeConfig& config, double tail_tol) {
  config.validate();
  if (spec.photons.size() != config.M) throw ValidationError("photons: expected " + std::to_string(config.M) + " entries");
  if (spec.qubits.size() != config.M) throw ValidationError("qubits: expected " + std::to_string(config.M) + " entries");

  StateVector psi = StateVector::Ones(1);
  for (std::size_t i = 0; i < config.M; ++i) {
    const int nmax = config.cutoff(i);
    const double occ = spec.photons[i];
    if (!(occ >= 0.0)) throw ValidationError(site_field("photons", i) + ": must be non-negative");

    Eigen::VectorXcd photon = Eigen::VectorXcd::Zero(nmax + 1);
    if (spec.photon_kind == PhotonKind::fock) {
      if (std::abs(occ - std::round(occ)) > 1e-12) {
        throw ValidationError(site_field("photons", i) + ": Fock occupation must be an integer");
      }
      const auto n = static_cast<int>(std::lround(occ));
      if (n > nmax) {
        throw TruncationError(site_field("photons", i) + ": occupation " + std::to_string(n) + " exceeds cutoff " +
                              std::to_string(nmax));
      }
      photon(n) = 1.0;
    } else {
      // Poisson weights via the stable recurrence c_k = c_{k-1} * alpha / sqrt(k).
      const double alpha = std::sqrt(occ);
      double c = std::exp(-0.5 * occ);
      double kept = 0.0;
      for (int k = 0; k <= nmax; ++k) {
        if (k > 0) c *= alpha / std::sqrt(static_cast<double>(k));
        photon(k) = c;
        kept += c * c;
      }
      if (1.0 - kept > tail_tol) {
        throw TruncationError(site_field("photons", i) + ": coherent tail beyond cutoff " + std::to_string(nmax) +
                              " is " + std::to_string(1.0 - kept));
      }
      photon /= std::sqrt(kept);
    }

    const auto ql = static_cast<Eigen::Index>(config.qubit_levels(i));
    Eigen::VectorXcd qubit = Eigen::VectorXcd::Zero(ql);
    if (ql == 1) {
      if (spec.qubits[i] != QubitState::down) {
        throw ValidationError(site_field("qubits", i) + ": an omitted qubit must start in |down>");
      }
      qubit(0) = 1.0;
    } else {
      switch (spec.qubits[i]) {
        case QubitState::down: qubit(0) = 1.0; break;
        case QubitState::up: qubit(1) = 1.0; break;
        case QubitState::superposition: qubit.setConstant(1.0 / std::sqrt(2.0)); break;
      }
    }

    StateVector site(ql * (nmax + 1));
    for (int k = 0; k <= nmax; ++k) site.segment(ql * k, ql) = photon(k) * qubit;

    StateVector next(psi.size() * site.size());
    for (Eigen::Index l = 0; l < psi.size(); ++l) next.segment(l * site.size(), site.size()) = psi(l) * site;
    psi = std::move(next);
  }
  return psi;
}

LatticeConfig omit_idle_qubits(const LatticeConfig& config, const std::vector<QubitState>& qubits) {
  if (qubits.size() != config.M) throw ValidationError("qubits: expected " + std::to_string(config.M) + " entries");
  LatticeConfig out = config;
  out.qubit_omitted.assign(config.M, false);
  for (std::size_t i = 0; i < config.M; ++i) {
    const bool was_omitted = !config.has_qubit(i);
    out.qubit_omitted[i] = was_omitted || (config.g[i] == 0.0 && qubits[i] == QubitState::down);
  }
  return out;
}

int default_cutoff(double max_initial_photons) {
  const double n = std::max(0.0, max_initial_photons);
  return static_cast<int>(std::ceil(n + 6.0 * std::sqrt(n))) + 2;
}

SiteDiagonals site_diagonals(const LatticeConfig& config) {
  const std::size_t dim = config.dimension();
  SiteDiagonals out;
  std::size_t right = dim;
  for (std::size_t i = 0; i < config.M; ++i) {
    const std::size_t local = config.site_dim(i);
    const std::size_t ql = config.qubit_levels(i);
    right /= local;
    Eigen::VectorXd n(dim), sz(dim), top(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t li = (k / right) % local;
      const std::size_t photons = li / ql;
      n(static_cast<Eigen::Index>(k)) = static_cast<double>(photons);
      sz(static_cast<Eigen::Index>(k)) = (li % ql == 0) ? -0.5 : 0.5;
      top(static_cast<Eigen::Index>(k)) = photons == static_cast<std::size_t>(config.cutoff(i)) ? 1.0 : 0.0;
    }
    out.n.push_back(std::move(n));
    out.sz.push_back(std::move(sz));
    out.top_level.push_back(std::move(top));
  }
  return out;
}

Eigen::VectorXd excitation_diagonal(const LatticeConfig& config) {
  const auto diag = site_diagonals(config);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.dimension()));
  for (std::size_t i = 0; i < config.M; ++i) out += diag.n[i] + diag.sz[i] + Eigen::VectorXd::Constant(out.size(), 0.5);
  return out;
}

}  // namespace jcarray
