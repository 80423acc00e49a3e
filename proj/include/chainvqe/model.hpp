#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "chainvqe/common.hpp"

namespace chainvqe {

enum class Boundary { open, periodic };
enum class Geometry { chain, two_leg_ladder };

/// Lattice and anisotropy of an XXZ model.
///
/// Sites are 0-based.  For the two-leg ladder the sites are ordered rung-major:
/// site = 2 * rung + leg, so every rung is a nearest-neighbour pair in the linear
/// ordering and leg bonds connect sites two apart.
struct ChainSpec {
  int n_sites = 4;
  double delta = 1.0;
  Boundary boundary = Boundary::open;
  Geometry geometry = Geometry::chain;

  /// Throws GeometryError when the geometry cannot host a singlet product.
  void validate() const;

  int n_rungs() const { return n_sites / 2; }
};

struct Coupling {
  double jx = 1.0;
  double jy = 1.0;
  double jz = 1.0;

  static Coupling xxz(double delta) { return {1.0, 1.0, delta}; }
  Coupling scaled(double s) const { return {s * jx, s * jy, s * jz}; }
};

/// One summand Jx XX + Jy YY + Jz ZZ acting on (site_a, site_b).
struct BondTerm {
  int site_a = 0;
  int site_b = 1;
  Coupling coupling;
};

/// Bonds grouped the way the ansatz and the parallel measurement settings use them.
///
/// Chains: `odd` holds the pairs (2k, 2k+1) that carry the initial singlets and
/// `even` the pairs (2k+1, 2k+2), plus the wrap bond (N-1, 0) on periodic chains.
/// Ladders: `odd`/`even` hold the leg bonds between rungs (2k, 2k+1) and
/// (2k+1, 2k+2) on both legs, and `rungs` the vertical bonds.
struct BondLayout {
  std::vector<BondTerm> odd;
  std::vector<BondTerm> even;
  std::vector<BondTerm> rungs;
};

BondLayout bond_layout(const ChainSpec& spec);

/// All Hamiltonian terms for the geometry, sorted by (site_a, site_b).
std::vector<BondTerm> build_hamiltonian(const ChainSpec& spec);

/// Terms of the odd-bond Hamiltonian whose unique ground state is the singlet product.
std::vector<BondTerm> odd_bond_hamiltonian(const ChainSpec& spec);

/// 4x4 matrix of a bond term in the basis |q_a q_b>, index = 2 q_a + q_b.
Matrix4c bond_matrix(const Coupling& c);

/// Energies of the bond term on the Bell states, ordered Phi+, Phi-, Psi+, Psi-.
std::array<double, 4> bell_state_energies(const Coupling& c);

/// exp(-tau * h) for a bond term; real because XX, YY and ZZ are real.
Eigen::Matrix4d bond_propagator(const Coupling& c, double tau);

struct SpectrumResult {
  /// Ascending.  Full spectrum for dense diagonalisation, lowest few for Lanczos.
  std::vector<double> eigenvalues;
  std::optional<Eigen::VectorXd> ground_vector;

  double ground_energy() const { return eigenvalues.front(); }
  double gap() const;
};

struct DiagonalizationOptions {
  int max_sites = 20;
  /// Dimensions up to 2^dense_max_sites use full dense diagonalisation.
  int dense_max_sites = 10;
  int lanczos_krylov = 60;
  int lanczos_max_restarts = 200;
  double lanczos_tol = 1e-11;
};

/// Sparse real-symmetric Hamiltonian acting on the 2^N computational basis (site q = bit q).
class SpinHamiltonian {
 public:
  SpinHamiltonian(int n_sites, std::vector<BondTerm> bonds);

  int n_sites() const { return n_sites_; }
  std::size_t dimension() const { return std::size_t{1} << n_sites_; }
  std::span<const BondTerm> bonds() const { return bonds_; }

  /// y = H x.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::MatrixXd dense() const;

 private:
  int n_sites_;
  std::vector<BondTerm> bonds_;
};

/// Lowest `n_levels` eigenpairs of a Hamiltonian given by bond terms.
SpectrumResult diagonalize(int n_sites, const std::vector<BondTerm>& bonds, int n_levels = 2,
                           const DiagonalizationOptions& options = {});

SpectrumResult exact_ground_state(const ChainSpec& spec, const DiagonalizationOptions& options = {});

struct GapPoint {
  double s = 0.0;
  double gap = 0.0;
  double ground_energy = 0.0;
};

/// Gap of H(s) = (1 - s) H_odd + s H_XXZ on each grid point.
std::vector<GapPoint> gap_scan(const ChainSpec& spec, std::span<const double> s_grid,
                               const DiagonalizationOptions& options = {});

/// Exact energy of the singlet product, -(2 + Delta) N / 2.
double bell_pair_energy(const ChainSpec& spec);

/// Ground-state energy per site of the infinite Heisenberg chain (Pauli units), 1 - 4 ln 2.
double bethe_energy_density();

}  // namespace chainvqe
