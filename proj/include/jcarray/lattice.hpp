#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "jcarray/types.hpp"

namespace jcarray {

/// Physical parameters of a driven-dissipative Jaynes-Cummings chain in the
/// frame rotating at the drive frequency. Energies and rates are in units of
/// the hopping J.
///
/// Basis convention: the product space is site-major with site 0 the
/// slowest-varying index; inside a site the photon number is the slow index
/// and the qubit level (0 = down, 1 = up) the fast one, so the local index of
/// |n, q> is 2n + q.
struct LatticeConfig {
  std::size_t M = 1;
  double J = 1.0;
  double delta_c = 0.01;  // omega_c - omega_p
  double delta_q = 0.01;  // omega_0 - omega_p
  std::vector<double> g;  // per-site light-matter coupling
  std::vector<double> d;  // per-site coherent drive amplitude
  double kappa = 0.0;
  double gamma = 0.0;
  int n_max = 0;
  // Optional per-site Fock cutoffs overriding n_max (empty = uniform).
  std::vector<int> site_cutoffs;
  // Adds the (M-1, 0) bond for M > 2. Off for every shipped experiment.
  bool periodic = false;
  // Sites whose qubit is left out of the product space (empty = none). Only
  // allowed where g_i = 0: such a qubit never leaves |down> when it starts
  // there, so dropping it is exact and halves that site's dimension.
  std::vector<bool> qubit_omitted;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  int cutoff(std::size_t site) const;
  bool has_qubit(std::size_t site) const { return qubit_omitted.empty() || !qubit_omitted.at(site); }
  std::size_t qubit_levels(std::size_t site) const { return has_qubit(site) ? 2 : 1; }
  std::size_t site_dim(std::size_t site) const {
    return qubit_levels(site) * static_cast<std::size_t>(cutoff(site) + 1);
  }
  std::size_t dimension() const;
  bool uniform_cutoff() const;

  /// Nearest-neighbour bonds (i, j) with i < j for open chains.
  std::vector<std::pair<std::size_t, std::size_t>> bonds() const;
};

/// Uniform chain with every site sharing the same coupling and drive.
LatticeConfig make_uniform_chain(std::size_t M, double g, double d, double kappa, double gamma, int n_max);

/// Matrices on a single site of dimension 2(n_max + 1), or n_max + 1 without
/// a qubit (then s^- = s^+ = 0 and s^z = -1/2).
struct LocalOperatorSet {
  SparseMatrix a;
  SparseMatrix a_dag;
  SparseMatrix n;
  SparseMatrix s_minus;
  SparseMatrix s_plus;
  SparseMatrix s_z;
  SparseMatrix identity;
};

LocalOperatorSet site_operators(int n_max, bool with_qubit = true);

/// Operator on the full product space. `site` is set when the operator acts
/// on a single site only.
struct EmbeddedOperator {
  std::optional<std::size_t> site;
  SparseMatrix matrix;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Kronecker embedding I (x) ... (x) local (x) ... (x) I.
EmbeddedOperator embed_operator(const SparseMatrix& local, std::size_t site, const LatticeConfig& config);

/// Rotating-frame lattice Hamiltonian:
///   sum_i [dq s^z_i + dc n_i + g_i (a_i^+ s^-_i + a_i s^+_i) + d_i (a_i + a_i^+)]
///   - J sum_<ij> (a_i^+ a_j + h.c.)
EmbeddedOperator build_hamiltonian(const LatticeConfig& config);

enum class Channel { photon_loss, qubit_decay };

struct CollapseOperator {
  Channel channel;
  std::size_t site;
  double rate;
  SparseMatrix matrix;  // sqrt(rate) * local operator, embedded
};

/// {sqrt(kappa) a_i} and {sqrt(gamma) s^-_i}, ordered by site, photon loss
/// first. Zero-rate channels are omitted.
std::vector<CollapseOperator> build_collapse_operators(const LatticeConfig& config);

enum class PhotonKind { fock, coherent };
enum class QubitState { down, up, superposition };

/// Maps the qubit label s^z in {-1/2, +1/2, 0} to a state, where
/// 0 denotes the equal superposition (|down> + |up>)/sqrt(2).
QubitState qubit_state_from_sz(double sz);
double qubit_state_sz(QubitState q);

struct ProductStateSpec {
  std::vector<double> photons;  // occupation (fock) or mean photon number (coherent)
  std::vector<QubitState> qubits;
  PhotonKind photon_kind = PhotonKind::fock;
};

/// Normalized product state. Fock occupations must be integers within the
/// cutoff; a coherent site with mean N gets amplitude sqrt(N) and must keep
/// the Poisson tail beyond the cutoff below `tail_tol`.
StateVector product_state(const ProductStateSpec& spec, const LatticeConfig& config, double tail_tol = 1e-6);

/// Copy of `config` with the qubit omitted at every site that has g_i = 0
/// and starts in |down>.
LatticeConfig omit_idle_qubits(const LatticeConfig& config, const std::vector<QubitState>& qubits);

/// ceil(N + 6 sqrt(N)) + 2.
int default_cutoff(double max_initial_photons);

/// Diagonals of the site-local number and s^z operators on the full space.
/// Both are diagonal in the product Fock basis, which keeps observable
/// evaluation O(D).
struct SiteDiagonals {
  std::vector<Eigen::VectorXd> n;
  std::vector<Eigen::VectorXd> sz;
  std::vector<Eigen::VectorXd> top_level;  // indicator of the site's top Fock level
};

SiteDiagonals site_diagonals(const LatticeConfig& config);

/// Sum_i (n_i + s^z_i + 1/2); conserved by H when every d_i = 0.
Eigen::VectorXd excitation_diagonal(const LatticeConfig& config);

}  // namespace jcarray
