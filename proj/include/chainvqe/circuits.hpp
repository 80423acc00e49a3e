#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chainvqe/common.hpp"
#include "chainvqe/model.hpp"

namespace chainvqe {

/// Native gate set {RZ, SX, X, CNOT}.
enum class GateKind { rz, sx, x, cnot };

struct NativeGate {
  GateKind kind = GateKind::x;
  int q0 = 0;       // target of 1q gates, control of CNOT
  int q1 = -1;      // CNOT target
  double angle = 0;  // RZ only

  static NativeGate rz(int q, double angle) { return {GateKind::rz, q, -1, angle}; }
  static NativeGate sx(int q) { return {GateKind::sx, q, -1, 0.0}; }
  static NativeGate x(int q) { return {GateKind::x, q, -1, 0.0}; }
  static NativeGate cnot(int control, int target) { return {GateKind::cnot, control, target, 0.0}; }

  bool is_two_qubit() const { return kind == GateKind::cnot; }
  bool operator==(const NativeGate&) const = default;
};

/// 2x2 matrix of a one-qubit native gate.  RZ(t) = diag(e^{-it/2}, e^{it/2}), SX = sqrt(X).
Matrix2c native_matrix_1q(const NativeGate& g);

/// Ordered list of native gates on `n_qubits` qubits.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::span<const NativeGate> gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  Circuit& push(const NativeGate& g);
  Circuit& rz(int q, double angle) { return push(NativeGate::rz(q, angle)); }
  Circuit& sx(int q) { return push(NativeGate::sx(q)); }
  Circuit& x(int q) { return push(NativeGate::x(q)); }
  Circuit& cnot(int control, int target) { return push(NativeGate::cnot(control, target)); }
  /// Hadamard up to phase, emitted as S SX S with S = RZ(pi/2).
  Circuit& h(int q);
  Circuit& append(const Circuit& other);

  int cnot_count() const;
  /// Number of CNOT layers when gates are packed as early as possible.
  int cnot_depth() const;

  /// Dense 2^n x 2^n unitary (little-endian: qubit q is bit q).  Small n only.
  Eigen::MatrixXcd unitary() const;

  bool operator==(const Circuit&) const = default;

 private:
  int n_qubits_ = 0;
  std::vector<NativeGate> gates_;
};

/// Exact exp(-i(tx/2) XX - i(ty/2) YY - i(tz/2) ZZ) in the basis |q_a q_b>, index = 2 q_a + q_b.
Matrix4c rxyz_matrix(double theta_x, double theta_y, double theta_z);

/// Appends the three-CNOT native realisation of rxyz_matrix on qubits (a, b).
void append_rxyz(Circuit& c, int a, int b, double theta_x, double theta_y, double theta_z);

/// Two-qubit circuit for Rxyz on qubits (0, 1).
Circuit rxyz_native(double theta_x, double theta_y, double theta_z);

/// Prepares (|01> - |10>)/sqrt2 on every pair (2k, 2k+1) from |0...0>.
Circuit singlet_init_circuit(int n_sites);

/// Per-bond angles; the gate on that bond is Rxyz(2x, 2y, 2z) = exp(-i(x XX + y YY + z ZZ)).
struct BondAngles {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static BondAngles isotropic(double t) { return {t, t, t}; }
  bool operator==(const BondAngles&) const = default;
};

struct LayerAngles {
  BondAngles odd;
  BondAngles even;
  BondAngles rung;  // ladder only
  bool operator==(const LayerAngles&) const = default;
};

/// heisenberg: x = y = z per bond group; xxz: x = y, z free; free: all three free.
enum class Tying { heisenberg, xxz, free };

/// Layered variational angles.  The flat parameter vector per layer is, per bond
/// group (even, odd, then rung for ladders): one angle (heisenberg), (xy, z) (xxz)
/// or (x, y, z) (free).
struct AnsatzParams {
  std::vector<LayerAngles> layers;
  Tying tying = Tying::heisenberg;

  int n_layers() const { return static_cast<int>(layers.size()); }

  /// One-layer Heisenberg parameters in the (theta_even, theta_odd) order used in tables.
  static AnsatzParams heisenberg(std::span<const std::pair<double, double>> even_odd);
  static AnsatzParams zeros(int n_layers, Tying tying);

  static int params_per_group(Tying tying);
  static int groups_per_layer(Geometry geometry) { return geometry == Geometry::chain ? 2 : 3; }
  int n_parameters(Geometry geometry) const;

  std::vector<double> to_vector(Geometry geometry) const;
  static AnsatzParams from_vector(std::span<const double> v, Tying tying, Geometry geometry);

  /// Throws ArgumentError when the angles violate the tying.
  void validate() const;

  /// Folds every angle into its periodicity window ([0, pi/2) for heisenberg, [0, pi) otherwise).
  AnsatzParams canonical() const;
};

/// Singlet initialisation followed by the variational layers.  Chains: per layer
/// all even bonds, then all odd bonds.  Ladders: per layer horizontal odd bonds,
/// horizontal even bonds, then all rungs.
Circuit build_ansatz(const ChainSpec& spec, const AnsatzParams& params);

/// Reverse order with each gate inverted.  SX^-1 is emitted as X SX.
Circuit invert(const Circuit& c);

/// c (c^-1 c)^n_folds.
struct FoldedCircuit {
  Circuit base;
  int n_folds = 0;
  Circuit circuit;

  int m() const { return 2 * n_folds + 1; }
};

FoldedCircuit fold(const Circuit& c, int n_folds);

enum class BondParity { odd, even };
enum class PauliBasis { x, y, z };

/// One measurement setting appended to a state-preparation circuit.
struct MeasurementSetting {
  enum class Kind { bell, pauli, tomography };
  Kind kind = Kind::pauli;
  BondParity parity = BondParity::odd;
  PauliBasis basis_a = PauliBasis::z;
  PauliBasis basis_b = PauliBasis::z;

  static MeasurementSetting bell(BondParity p) { return {Kind::bell, p, PauliBasis::z, PauliBasis::z}; }
  static MeasurementSetting pauli(PauliBasis b) { return {Kind::pauli, BondParity::odd, b, b}; }
  static MeasurementSetting tomography(BondParity p, PauliBasis a, PauliBasis b) {
    return {Kind::tomography, p, a, b};
  }

  std::string name() const;
};

/// Disjoint (first, second) qubit pairs measured together for a parity.
std::vector<std::pair<int, int>> parity_pairs(const ChainSpec& spec, BondParity parity);

/// Bell readout maps (b_first, b_second) after CNOT + H to Phi+ (00), Phi- (10), Psi+ (01), Psi- (11).
/// Outcome index = b_first + 2 b_second.
Circuit append_measurement_basis(const Circuit& c, const ChainSpec& spec,
                                 const MeasurementSetting& setting);

/// Text format: one gate per line, `GATE q0 [q1] [angle]`; `#` starts a comment.
void write_circuit(std::ostream& os, const Circuit& c);
Circuit read_circuit(std::istream& is);

}  // namespace chainvqe
