#include <gtest/gtest.h>

#include <cmath>

#include "chainvqe/dense.hpp"
#include "chainvqe/measure.hpp"
#include "chainvqe/mps.hpp"

using namespace chainvqe;

namespace {

AnsatzParams one_layer(double even, double odd) {
  AnsatzParams p = AnsatzParams::zeros(1, Tying::heisenberg);
  p.layers[0].even = {even, even, even};
  p.layers[0].odd = {odd, odd, odd};
  return p;
}

Matrix4c pure(const Eigen::Vector4cd& v) { return v * v.adjoint(); }

}  // namespace

TEST(Measure, ThreeProtocolsAgreeWithExactEnergy) {
  const ChainSpec spec{6, 0.5};
  const DenseState s = prepare_ansatz_state(spec, one_layer(0.14, 0.22));
  const double exact = expectation(s, build_hamiltonian(spec));
  const ShotSource src = dense_source(s, {}, 21);
  const auto bell = energy_bell(src, spec, 50000).estimate;
  const auto xyz = energy_xyz(src, spec, 50000);
  const auto tomo = pairwise_tomography(src, spec, 50000).estimate;
  EXPECT_NEAR(bell.energy, exact, 4 * bell.stderr);
  EXPECT_NEAR(xyz.energy, exact, 4 * xyz.stderr);
  EXPECT_NEAR(tomo.energy, exact, 4 * tomo.stderr);
  EXPECT_GT(bell.stderr, 0.0);
}

TEST(Measure, SingletProductBellEnergyIsExactWithoutNoise) {
  // Each odd pair always reads Psi-, every even-pair outcome is drawn but the mean is still exact.
  const ChainSpec spec{8, 1.0};
  const DenseState s = run_exact(singlet_init_circuit(8));
  const BellMeasurement m = energy_bell(dense_source(s, {}, 2), spec, 20000);
  for (const auto& h : m.histograms) {
    if (h.parity != BondParity::odd) continue;
    for (const auto& c : h.counts) EXPECT_EQ(c[3], 20000);
  }
  EXPECT_NEAR(m.estimate.energy, bell_pair_energy(spec), 5 * m.estimate.stderr + 1e-12);
}

TEST(Measure, StderrShrinksWithShots) {
  const ChainSpec spec{6, 1.0};
  const ShotSource src = dense_source(prepare_ansatz_state(spec, one_layer(0.14, 0.22)), {}, 8);
  const double a = energy_xyz(src, spec, 10000).stderr;
  const double b = energy_xyz(src, spec, 160000).stderr;
  EXPECT_NEAR(a / b, 4.0, 0.4);
}

TEST(Measure, MpsSourceAgreesWithDenseSource) {
  const ChainSpec spec{8, 1.0};
  const AnsatzParams p = one_layer(0.14, 0.22);
  const auto d = energy_bell(dense_source(prepare_ansatz_state(spec, p), {}, 1), spec, 40000).estimate;
  const auto m = energy_bell(mps_source(mps_ansatz_state(spec, p), {}, 2), spec, 40000).estimate;
  EXPECT_NEAR(d.energy, m.energy, 4 * std::hypot(d.stderr, m.stderr));
}

TEST(Measure, CorrelatorInversionRecoversState) {
  const Eigen::Vector4cd v = Eigen::Vector4cd(Complex(0.3, 0.1), Complex(0.5, -0.2), 0.4, Complex(0.1, 0.6)).normalized();
  const Matrix4c rho = pure(v);
  std::array<std::array<double, 4>, 4> c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Matrix4c p;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) p.block<2, 2>(2 * a, 2 * b) = pauli(i)(a, b) * pauli(j);
      c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (rho * p).trace().real();
    }
  EXPECT_LT((density_from_correlators(c) - rho).norm(), 1e-12);
}

TEST(Measure, ConcurrenceReferenceValues) {
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(concurrence(pure({0, r, -r, 0})), 1.0, 1e-12);
  EXPECT_NEAR(concurrence(pure({1, 0, 0, 0})), 0.0, 1e-12);
  // cos t |00> + sin t |11> has concurrence sin 2t.
  const double t = 0.3;
  EXPECT_NEAR(concurrence(pure({std::cos(t), 0, 0, std::sin(t)})), std::sin(2 * t), 1e-12);
  // Werner state p |Psi-><Psi-| + (1 - p) I/4: max(0, (3p - 1)/2).
  for (double p : {0.2, 0.5, 0.9}) {
    const Matrix4c w = p * pure({0, r, -r, 0}) + (1 - p) / 4 * Matrix4c::Identity();
    EXPECT_NEAR(concurrence(w), std::max(0.0, (3 * p - 1) / 2), 1e-12);
  }
  EXPECT_THROW(concurrence(Matrix4c::Identity()), DomainError);
}

TEST(Measure, ProjectionGivesPsdUnitTrace) {
  Matrix4c rho = pure(Eigen::Vector4cd(1, 0, 0, 0));
  rho(1, 1) = -0.05;
  rho(2, 2) = 0.05;
  const Matrix4c p = project_psd(rho);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix4c>(p).eigenvalues().minCoeff(), -1e-12);
}

TEST(Measure, TomographyNeedsAChain) {
  const ChainSpec ladder{6, 1.0, Boundary::open, Geometry::two_leg_ladder};
  const ShotSource src = dense_source(DenseState(6), {}, 0);
  EXPECT_THROW(pairwise_tomography(src, ladder, 100), DomainError);
}
