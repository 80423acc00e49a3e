#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/common.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/model.hpp"

namespace chainvqe {

struct MpsOptions {
  int chi_max = 64;
  /// Largest discarded fraction of squared singular values per truncation.
  double svd_cutoff = 1e-12;
};

/// Discarded weight, cumulative over two-site gate applications.
struct TruncationLog {
  std::vector<double> cumulative;

  void record(double discarded) {
    cumulative.push_back(total() + discarded);
  }
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  std::size_t n_gates() const { return cumulative.size(); }
};

/// Open-boundary matrix-product state in mixed canonical form.  Sites left of
/// `center()` are left-orthonormal, sites right of it right-orthonormal; the
/// centre tensor carries the norm.  Site k stores one Dl x Dr matrix per physical
/// value s in {0, 1}.
template <class T>
class Mps {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Op1 = Eigen::Matrix<T, 2, 2>;
  using Op2 = Eigen::Matrix<T, 4, 4>;
  using Site = std::array<Matrix, 2>;

  Mps() = default;
  Mps(std::vector<Site> sites, int center, MpsOptions options);

  /// Singlets on (2k, 2k+1), with the same sign convention as singlet_init_circuit.
  static Mps singlets(int n_sites, MpsOptions options = {});
  /// Computational basis state; bits[k] is the value of site k.
  static Mps product(std::span<const int> bits, MpsOptions options = {});

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int center() const { return center_; }
  const MpsOptions& options() const { return options_; }
  const TruncationLog& log() const { return log_; }
  const Site& site(int k) const { return sites_[static_cast<std::size_t>(k)]; }
  /// Dimension of the bond between site k and k + 1.
  int bond_dimension(int k) const;
  int max_bond_dimension() const;

  void move_center(int site);
  double norm() const;
  void normalize();

  void apply_one_site(const Op1& u, int q);
  /// u in the basis |q_a q_b>, index = 2 q_a + q_b; |a - b| must be 1.
  /// The orthogonality centre ends on the right site of the pair, or on the left
  /// one when `center_left` is set.
  void apply_two_site(const Op2& u, int a, int b, bool center_left = false);
  /// Any pair of sites, routed through nearest-neighbour swaps and back.
  void apply_two_site_routed(const Op2& u, int a, int b);

  /// <psi| prod_k op_k |psi> for distinct sites.  Moves the centre; state unchanged.
  T correlator(std::span<const std::pair<int, Op1>> ops);
  /// Sum over bonds of <Jx XX + Jy YY + Jz ZZ> (any site distance).
  double expectation(std::span<const BondTerm> bonds);

  /// Sequential sampling with readout flips applied afterwards.
  ShotRecord sample(std::int64_t shots, std::uint64_t seed, const NoiseModel& noise = {});

  /// Dense amplitudes (small N only).
  DenseState to_dense(int max_qubits = kDefaultDenseQubitCap) const;

  std::string to_json() const;
  static Mps from_json(const std::string& text);
  void save(const std::string& path) const;
  static Mps load(const std::string& path);

 private:
  void move_right();
  void move_left();

  std::vector<Site> sites_;
  int center_ = 0;
  MpsOptions options_;
  TruncationLog log_;
};

using RealMps = Mps<double>;
using ComplexMps = Mps<Complex>;

ComplexMps to_complex(const RealMps& m);

/// <a|b>.
Complex overlap(const ComplexMps& a, const ComplexMps& b);
double mps_overlap(const ComplexMps& a, const ComplexMps& b);
double mps_overlap(const ComplexMps& a, const RealMps& b);

ComplexMps mps_singlets(int n_sites, MpsOptions options = {});

/// Reduced density matrix of (a, b) built from the 16 two-site Pauli correlators.
Matrix4c reduced_density_matrix(ComplexMps& state, int a, int b);

struct MpsAnsatzResult {
  double energy = 0.0;
  double discarded_weight = 0.0;
  int max_bond_dimension = 0;
  std::vector<std::string> warnings;
  ComplexMps state;
};

/// Ansatz state with the same gate order as build_ansatz.
ComplexMps mps_ansatz_state(const ChainSpec& spec, const AnsatzParams& params, MpsOptions options = {});

/// Energy of the ansatz; a warning is attached when the total discarded weight
/// exceeds `max_discarded`.
MpsAnsatzResult mps_ansatz_energy(const ChainSpec& spec, const AnsatzParams& params,
                                  MpsOptions options = {}, double max_discarded = 1e-8);

struct ItebdOptions {
  std::vector<double> dtau_schedule{0.1, 0.01, 0.001};
  /// Energy is evaluated after this many Trotter steps.
  int check_every = 10;
  int max_steps_per_stage = 20000;
  /// A stage ends once |dE| / (dtau * check_every) between checks is below tol_per_site * N.
  double tol_per_site = 1e-9;
  /// Written after every stage when non-empty.
  std::string checkpoint_path;
};

struct ItebdResult {
  RealMps state;
  double energy = 0.0;
  std::vector<double> energy_history;
  int steps = 0;
};

/// Imaginary-time TEBD (second-order Trotter) from the singlet product, or from
/// `initial` when given.  Open chains only.
ItebdResult itebd_ground_state(const ChainSpec& spec, MpsOptions options = {},
                               const ItebdOptions& itebd = {}, const RealMps* initial = nullptr);

}  // namespace chainvqe
