#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/measure.hpp"
#include "chainvqe/mps.hpp"

namespace chainvqe {

/// A gate block of a noisy circuit: a unitary on one or two qubits followed by
/// depolarizing noise on the same qubits.  The uniform 15-Pauli error after a
/// CNOT is the two-qubit depolarizing channel, which commutes with every unitary
/// on that pair, so all gates on a pair between interruptions merge into one
/// block whose survival probability is the product over its CNOTs.
struct NoisyBlock {
  int a = 0;
  int b = -1;  // -1 for one-qubit blocks
  Matrix4c u = Matrix4c::Identity();  // basis index 2 q_a + q_b; top-left 2x2 for one-qubit blocks
  /// rho -> (1 - q) rho + q Tr(rho) (x) I / d on the block's qubits.
  double depolarizing = 0.0;

  bool is_two_qubit() const { return b >= 0; }
};

std::vector<NoisyBlock> compile_noisy_blocks(const Circuit& c, const NoiseModel& noise);

/// Exact noisy evolution of a small register (<= 12 qubits) as a dense density matrix.
Eigen::MatrixXcd run_density_matrix(const Circuit& c, const NoiseModel& noise, int max_qubits = 12);

/// Matrix product form of a vectorised density operator: every site carries the
/// four-valued index s = i + 2 j of rho_{..i..,..j..}.  Trace-preserving channels
/// stay trace preserving up to truncation; observables divide by the trace.
class DensityMps {
 public:
  using Matrix = Eigen::MatrixXcd;
  using Site = std::array<Matrix, 4>;

  DensityMps() = default;
  static DensityMps zero_state(int n_sites, MpsOptions options = {});

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int bond_dimension(int k) const { return static_cast<int>(sites_[static_cast<std::size_t>(k)][0].cols()); }
  int max_bond_dimension() const;
  const TruncationLog& truncation() const { return log_; }

  void apply(const NoisyBlock& block);
  /// Runs every block of the circuit; two-qubit blocks must act on neighbours.
  void run(const Circuit& c, const NoiseModel& noise);

  Complex trace() const;
  /// Two-qubit reduced density matrix in the basis 2 q_a + q_b (any a != b).
  Matrix4c pair_density(int a, int b) const;

 private:
  void move_right();
  void move_left();
  void move_center(int target);

  std::vector<Site> sites_;
  int center_ = 0;
  MpsOptions options_;
  TruncationLog log_;
};

/// Outcome distribution of the (noisy) Bell readout of a pair density matrix,
/// ordered b_first + 2 b_second, readout confusion included.
std::array<double, 4> bell_readout_distribution(const Matrix4c& rho_pair, std::pair<int, int> pair,
                                                const NoiseModel& noise);

/// Bell-measurement histograms drawn from the exact pair distributions of a noisy
/// preparation.  Pairs are sampled independently with `shots` shots each, so only
/// observables inside a measured pair are meaningful.
BellMeasurement density_bell_measurement(const DensityMps& rho, const ChainSpec& spec, const NoiseModel& noise,
                                         std::int64_t shots, std::uint64_t seed);

}  // namespace chainvqe
