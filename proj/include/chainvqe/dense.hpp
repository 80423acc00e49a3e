#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/common.hpp"
#include "chainvqe/model.hpp"

namespace chainvqe {

/// Statevector over n qubits, little-endian (qubit q is bit q of the basis index).
class DenseState {
 public:
  explicit DenseState(int n_qubits);
  DenseState(int n_qubits, std::vector<Complex> amplitudes);

  /// Embeds a real vector (e.g. an exact-diagonalisation eigenvector).
  static DenseState from_real(int n_qubits, const Eigen::VectorXd& v);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;
  void normalize();
  /// <this|other>.
  Complex inner(const DenseState& other) const;

  void apply_1q(const Matrix2c& u, int q);
  /// u in the basis |q_a q_b>, index = 2 q_a + q_b.
  void apply_2q(const Matrix4c& u, int a, int b);
  void apply_cnot(int control, int target);
  void apply_x(int q);
  void apply_rz(int q, double angle);
  /// index 0..3 = I, X, Y, Z.
  void apply_pauli(int q, int index);
  void apply_gate(const NativeGate& g);
  void apply_inverse(const NativeGate& g);
  void apply(const Circuit& c);

 private:
  int n_qubits_;
  std::vector<Complex> amps_;
};

constexpr int kDefaultDenseQubitCap = 24;

/// |0...0> evolved by the circuit without noise.
DenseState run_exact(const Circuit& c, int max_qubits = kDefaultDenseQubitCap);

/// Singlet product followed by the ansatz layers applied as exact 4x4 Rxyz blocks.
/// Same state as run_exact(build_ansatz(...)) up to global phase, far fewer passes.
DenseState prepare_ansatz_state(const ChainSpec& spec, const AnsatzParams& params,
                                int max_qubits = kDefaultDenseQubitCap);

/// Sum over bonds of <Jx XX + Jy YY + Jz ZZ>.
double expectation(const DenseState& state, std::span<const BondTerm> bonds);

/// <sigma_alpha(a) sigma_alpha(b)> for alpha = 1 (X), 2 (Y), 3 (Z).
double pauli_correlation(const DenseState& state, int a, int b, int alpha);

/// Reduced density matrix of qubits (a, b) in the basis |q_a q_b>, index = 2 q_a + q_b.
Matrix4c reduced_density_matrix(const DenseState& state, int a, int b);

/// |<a|b>|.
double fidelity(const DenseState& a, const DenseState& b);

/// Depolarising gate noise and per-qubit readout confusion.
///
/// readout[q] is column-stochastic: column j is the distribution of the read bit
/// given true bit j.  An empty readout list means ideal measurement.
struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  std::vector<Eigen::Matrix2d> readout;

  static NoiseModel ideal() { return {}; }
  /// Independent bit flips with P(read 1 | 0) = P(read 0 | 1) = flip on n qubits.
  static NoiseModel symmetric_readout(int n_qubits, double flip, double p2 = 0.0, double p1 = 0.0);
  static Eigen::Matrix2d flip_matrix(double p_read1_given0, double p_read0_given1);

  void validate() const;
  bool has_gate_noise() const { return p1 > 0.0 || p2 > 0.0; }
  Eigen::Matrix2d confusion(int q) const;
  /// Readout confusion restricted to the pair (a, b), re-indexed to qubits (0, 1).
  NoiseModel restricted_to_pair(int a, int b) const;
};

struct ShotRecord {
  /// Bitstring (character k = qubit k) to count.
  std::map<std::string, std::int64_t> counts;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;

  void merge(const ShotRecord& other);
};

/// One stochastic Pauli unravelling of the noisy circuit.  After every CNOT, with
/// probability p2 one of the 15 non-identity two-qubit Paulis is applied; after
/// every one-qubit gate, with probability p1 one of X, Y, Z.
DenseState run_trajectory(const Circuit& c, const NoiseModel& noise, std::uint64_t seed,
                          std::uint64_t trajectory_index = 0, int max_qubits = kDefaultDenseQubitCap);

/// Continues a trajectory from an existing state using the given RNG stream.
void apply_noisy(DenseState& state, const Circuit& c, const NoiseModel& noise, Rng& rng);

/// Draws computational-basis shots and then flips each bit per its confusion matrix.
ShotRecord sample(const DenseState& state, const NoiseModel& noise, std::int64_t shots,
                  std::uint64_t seed);

/// Trajectory simulator for U (U^-1 U)^n followed by a measurement tail.
///
/// Gate noise sites are drawn in the literal gate order of the folded circuit
/// (identical RNG consumption to run_trajectory), but the noiseless stretches
/// between two error events are replaced by the net movement through U, since
/// U^-1 U cancels exactly.  Falls back to the literal circuit when p1 > 0.
class FoldedTrajectoryRunner {
 public:
  FoldedTrajectoryRunner(FoldedCircuit folded, Circuit tail, NoiseModel noise,
                         int max_qubits = kDefaultDenseQubitCap);

  DenseState run(std::uint64_t seed, std::uint64_t trajectory_index) const;
  const NoiseModel& noise() const { return noise_; }
  int n_qubits() const { return folded_.base.n_qubits(); }

 private:
  struct Step {
    std::vector<std::pair<int, Matrix2c>> one_qubit;  // merged per qubit
    int control = -1;                                  // CNOT when >= 0
    int target = -1;
  };
  void move(DenseState& state, int from, int to) const;

  FoldedCircuit folded_;
  Circuit tail_;
  Circuit literal_;
  NoiseModel noise_;
  std::vector<Step> steps_;   // steps_[t] moves key point t -> t + 1
  std::vector<std::pair<int, int>> cnots_;  // (control, target) of every CNOT in U
};

}  // namespace chainvqe
