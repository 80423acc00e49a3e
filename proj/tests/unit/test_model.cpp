#include <gtest/gtest.h>

#include <cmath>

#include "chainvqe/dense.hpp"
#include "chainvqe/model.hpp"
#include "../support/hamiltonian_oracle.hpp"

using namespace chainvqe;

TEST(Model, OpenChainBondsMatchKroneckerHamiltonian) {
  for (double delta : {-0.8, 0.0, 1.0, 1.4}) {
    const ChainSpec spec{6, delta};
    const Eigen::MatrixXcd ref = oracle::hamiltonian(6, oracle::open_chain(6, delta));
    const Eigen::MatrixXd ours = SpinHamiltonian(6, build_hamiltonian(spec)).dense();
    EXPECT_LT((ours.cast<Complex>() - ref).norm(), 1e-12) << "delta " << delta;
  }
}

TEST(Model, BondLayoutPartitionsChain) {
  const BondLayout open = bond_layout({8, 1.0});
  EXPECT_EQ(open.odd.size(), 4u);
  EXPECT_EQ(open.even.size(), 3u);
  const BondLayout ring = bond_layout({8, 1.0, Boundary::periodic});
  EXPECT_EQ(ring.even.size(), 4u);
  const BondLayout ladder = bond_layout({8, 1.0, Boundary::open, Geometry::two_leg_ladder});
  EXPECT_EQ(ladder.rungs.size(), 4u);
  EXPECT_EQ(ladder.odd.size() + ladder.even.size(), 6u);
}

TEST(Model, GroundEnergiesAgreeWithFullDiagonalisation) {
  for (int n : {4, 6, 8}) {
    for (double delta : {-0.6, 0.5, 1.0}) {
      const double ref = oracle::spectrum(oracle::hamiltonian(n, oracle::open_chain(n, delta)))(0);
      EXPECT_NEAR(exact_ground_state({n, delta}).ground_energy(), ref, 1e-9);
    }
  }
}

TEST(Model, LanczosMatchesDenseDiagonalisation) {
  const ChainSpec spec{12, 1.0};
  DiagonalizationOptions dense;
  dense.dense_max_sites = 12;
  DiagonalizationOptions krylov;
  krylov.dense_max_sites = 4;
  const SpectrumResult a = exact_ground_state(spec, dense);
  const SpectrumResult b = exact_ground_state(spec, krylov);
  EXPECT_NEAR(a.ground_energy(), b.ground_energy(), 1e-9);
  EXPECT_NEAR(a.gap(), b.gap(), 1e-7);
  ASSERT_TRUE(b.ground_vector);
  EXPECT_NEAR(b.ground_vector->norm(), 1.0, 1e-10);
}

TEST(Model, TwoSiteGroundStateIsTheSinglet) {
  const SpectrumResult s = exact_ground_state({2, 1.0});
  EXPECT_NEAR(s.ground_energy(), -3.0, 1e-12);
  EXPECT_NEAR(s.gap(), 4.0, 1e-12);
}

TEST(Model, BellPairEnergyFormula) {
  for (int n : {2, 4, 10}) {
    for (double delta : {-0.8, 0.0, 1.0, 1.4}) {
      EXPECT_NEAR(bell_pair_energy({n, delta}), -(2.0 + delta) * n / 2.0, 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(bell_pair_energy({102, 1.0}), -153.0);
}

TEST(Model, GapScanStartsFromDimerGap) {
  // At s = 0 only the odd bonds act: singlet product, first excitation one triplet up.
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto pts = gap_scan({8, 1.0}, grid);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[0].gap, 4.0, 1e-9);
  EXPECT_NEAR(pts[0].ground_energy, -12.0, 1e-9);
  EXPECT_NEAR(pts[2].ground_energy, exact_ground_state({8, 1.0}).ground_energy(), 1e-9);
}

TEST(Model, BondPropagatorIsMatrixExponential) {
  const Coupling c = Coupling::xxz(0.7);
  const double tau = 0.13;
  Eigen::Matrix4d h = bond_matrix(c).real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(h);
  const Eigen::Matrix4d ref =
      es.eigenvectors() * (-tau * es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().transpose();
  EXPECT_LT((bond_propagator(c, tau) - ref).norm(), 1e-13);
}

TEST(Model, BetheDensity) { EXPECT_NEAR(bethe_energy_density(), 1.0 - 4.0 * std::log(2.0), 1e-15); }

TEST(Model, RejectsBadSpecs) {
  EXPECT_THROW(ChainSpec({3, 1.0}).validate(), DomainError);
  EXPECT_THROW(ChainSpec({5, 1.0, Boundary::open, Geometry::two_leg_ladder}).validate(), DomainError);
}
