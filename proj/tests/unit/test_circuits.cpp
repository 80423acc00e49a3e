#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "chainvqe/circuits.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/measure.hpp"
#include "../support/density_oracle.hpp"

using namespace chainvqe;

namespace {

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

Eigen::Matrix4cd rxyz_expm(double tx, double ty, double tz) {
  const Complex i(0.0, 1.0);
  const Eigen::Matrix4cd g = tx / 2 * kron(pauli(1), pauli(1)) + ty / 2 * kron(pauli(2), pauli(2)) +
                             tz / 2 * kron(pauli(3), pauli(3));
  return Eigen::Matrix4cd((-i * g).exp());
}

}  // namespace

TEST(Circuits, RxyzMatrixIsExponential) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int k = 0; k < 50; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    EXPECT_LT((rxyz_matrix(a, b, c) - rxyz_expm(a, b, c)).norm(), 1e-12);
  }
}

TEST(Circuits, NativeRxyzUsesThreeCnots) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2 * M_PI, 2 * M_PI);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const Circuit circ = rxyz_native(a, b, c);
    EXPECT_EQ(circ.cnot_count(), 3);
    EXPECT_LT(phase_invariant_distance(circ.unitary(), rxyz_expm(a, b, c)), 1e-10);
  }
}

TEST(Circuits, UnitaryMatchesEmbeddedGates) {
  Circuit c(3);
  c.h(0).cnot(0, 2).rz(1, 0.3).sx(2).x(1).cnot(2, 1);
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(8, 8);
  for (const auto& g : c.gates()) {
    ref = (g.kind == GateKind::cnot ? oracle::embed_cnot(3, g.q0, g.q1)
                                    : oracle::embed_1q(3, g.q0, native_matrix_1q(g))) *
          ref;
  }
  EXPECT_LT((c.unitary() - ref).norm(), 1e-12);
}

TEST(Circuits, SingletInitPreparesSinglets) {
  const DenseState s = run_exact(singlet_init_circuit(4));
  // (|01> - |10>)/sqrt2 on (0,1) and (2,3); qubit q is bit q.
  const double h = 0.5;
  auto amp = [&](int q0, int q1, int q2, int q3) { return s[q0 | q1 << 1 | q2 << 2 | q3 << 3]; };
  const Complex phase = amp(0, 1, 0, 1) / h;
  EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(amp(0, 1, 1, 0) / phase + h), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(amp(1, 0, 1, 0) / phase - h), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(amp(0, 0, 0, 1)), 0.0, 1e-12);
}

TEST(Circuits, InverseUndoesCircuit) {
  Circuit c(3);
  c.h(0).cnot(0, 1).rz(1, 0.71).sx(2).cnot(1, 2).x(0);
  Circuit both = c;
  both.append(invert(c));
  EXPECT_LT(phase_invariant_distance(both.unitary(), Eigen::MatrixXcd::Identity(8, 8)), 1e-12);
}

TEST(Circuits, FoldingTriplesCnotCountAndKeepsUnitary) {
  const Circuit c = rxyz_native(0.3, 0.5, 0.7);
  for (int n = 0; n < 4; ++n) {
    const FoldedCircuit f = fold(c, n);
    EXPECT_EQ(f.m(), 2 * n + 1);
    EXPECT_EQ(f.circuit.cnot_count(), f.m() * c.cnot_count());
    EXPECT_LT(phase_invariant_distance(f.circuit.unitary(), c.unitary()), 1e-10);
  }
}

TEST(Circuits, AnsatzStateMatchesNativeCircuit) {
  const ChainSpec spec{6, 0.6};
  AnsatzParams p = AnsatzParams::zeros(2, Tying::free);
  p.layers[0].even = {0.1, 0.2, 0.3};
  p.layers[0].odd = {0.4, -0.2, 0.25};
  p.layers[1].even = {-0.3, 0.15, 0.05};
  p.layers[1].odd = {0.2, 0.2, 0.9};
  const DenseState a = run_exact(build_ansatz(spec, p));
  const DenseState b = prepare_ansatz_state(spec, p);
  EXPECT_NEAR(fidelity(a, b), 1.0, 1e-12);
}

TEST(Circuits, ParameterVectorRoundTrip) {
  for (Tying t : {Tying::heisenberg, Tying::xxz, Tying::free}) {
    for (Geometry g : {Geometry::chain, Geometry::two_leg_ladder}) {
      AnsatzParams p = AnsatzParams::zeros(2, t);
      std::vector<double> v(static_cast<std::size_t>(p.n_parameters(g)));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i + 1);
      const AnsatzParams q = AnsatzParams::from_vector(v, t, g);
      EXPECT_EQ(q.to_vector(g), v);
      EXPECT_NO_THROW(q.validate());
    }
  }
}

TEST(Circuits, TextFormatRoundTrip) {
  const Circuit c = build_ansatz({4, 1.0}, AnsatzParams::zeros(1, Tying::heisenberg));
  std::stringstream ss;
  write_circuit(ss, c);
  EXPECT_EQ(read_circuit(ss), c);
}

TEST(Circuits, BellReadoutMapsBellStatesToOutcomes) {
  // Phi+ -> 0, Phi- -> 1, Psi+ -> 2, Psi- -> 3 with outcome b_first + 2 b_second.
  const ChainSpec spec{2, 1.0};
  const double r = 1 / std::sqrt(2.0);
  const std::vector<std::vector<Complex>> bell = {
      {r, 0, 0, r}, {r, 0, 0, -r}, {0, r, r, 0}, {0, r, -r, 0}};
  const Circuit readout = append_measurement_basis(Circuit(2), spec, MeasurementSetting::bell(BondParity::odd));
  for (int k = 0; k < 4; ++k) {
    DenseState s(2, bell[static_cast<std::size_t>(k)]);
    s.apply(readout);
    for (int idx = 0; idx < 4; ++idx) {
      const int outcome = bell_outcome(static_cast<char>('0' + (idx & 1)), static_cast<char>('0' + (idx >> 1)));
      EXPECT_NEAR(std::norm(s[static_cast<std::size_t>(idx)]), outcome == k ? 1.0 : 0.0, 1e-12);
    }
  }
}
