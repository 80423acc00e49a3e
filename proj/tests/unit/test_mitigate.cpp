#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chainvqe/mitigate.hpp"

using namespace chainvqe;

namespace {

ZNESeries exponential_series(double a, double b, double c, std::vector<int> ms, double noise = 0.0,
                             std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ZNESeries s;
  for (int m : ms) s.points.push_back({m, a * std::exp(-b * m) + c + noise * g(rng), noise > 0 ? noise : 1e-3});
  return s;
}

// Brute-force least squares on the simplex by a fine grid (oracle for unfold_distribution).
std::array<double, 4> grid_unfold(const Eigen::Matrix4d& m, const std::array<double, 4>& y) {
  std::array<double, 4> best{};
  double best_cost = 1e300;
  const int n = 60;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j)
      for (int k = 0; i + j + k <= n; ++k) {
        const Eigen::Vector4d p(i / double(n), j / double(n), k / double(n), (n - i - j - k) / double(n));
        const Eigen::Vector4d r = m * p - Eigen::Vector4d(y[0], y[1], y[2], y[3]);
        if (r.squaredNorm() < best_cost) {
          best_cost = r.squaredNorm();
          best = {p[0], p[1], p[2], p[3]};
        }
      }
  return best;
}

}  // namespace

TEST(Mitigate, UnfoldInvertsWellConditionedMatrix) {
  Eigen::Matrix4d m;
  m << 0.9, 0.05, 0.05, 0.0, 0.05, 0.9, 0.0, 0.05, 0.05, 0.0, 0.9, 0.05, 0.0, 0.05, 0.05, 0.9;
  const Eigen::Vector4d p(0.1, 0.2, 0.3, 0.4);
  const Eigen::Vector4d y = m * p;
  const auto u = unfold_distribution(m, {y[0], y[1], y[2], y[3]});
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(u[static_cast<std::size_t>(k)], p[k], 1e-10);
}

TEST(Mitigate, UnfoldStaysOnSimplexAndMatchesGridSearch) {
  Eigen::Matrix4d m;
  m << 0.8, 0.1, 0.1, 0.0, 0.1, 0.8, 0.0, 0.1, 0.1, 0.0, 0.8, 0.1, 0.0, 0.1, 0.1, 0.9;
  m.col(3) /= m.col(3).sum();
  const std::array<double, 4> y{0.02, 0.05, 0.03, 0.90};
  const auto u = unfold_distribution(m, y);
  const auto g = grid_unfold(m, y);
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    EXPECT_GE(u[static_cast<std::size_t>(k)], -1e-12);
    EXPECT_NEAR(u[static_cast<std::size_t>(k)], g[static_cast<std::size_t>(k)], 1.0 / 60);
    sum += u[static_cast<std::size_t>(k)];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Mitigate, IdealCalibrationIsIdentity) {
  const AssignmentMatrix a = calibrate_bell({0, 1}, 2000, {}, 1);
  EXPECT_LT((a.m - Eigen::Matrix4d::Identity()).norm(), 1e-12);
}

TEST(Mitigate, ReadoutCalibrationMatchesFlipProduct) {
  const NoiseModel noise = NoiseModel::symmetric_readout(2, 0.05);
  const AssignmentMatrix a = calibrate_readout({0, 1}, 200000, noise, 3);
  // Independent flips: M = F (x) F in the b_first + 2 b_second order.
  const Eigen::Matrix2d f = NoiseModel::flip_matrix(0.05, 0.05);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(a.m(i, j), f(i >> 1, j >> 1) * f(i & 1, j & 1), 0.004);
}

TEST(Mitigate, FitRecoversExactExponential) {
  const ExpFit f = fit_exponential(exponential_series(-12.0, 0.3, -2.5, {1, 3, 5, 7}));
  EXPECT_NEAR(f.a, -12.0, 1e-6);
  EXPECT_NEAR(f.b, 0.3, 1e-7);
  EXPECT_NEAR(f.c, -2.5, 1e-6);
  EXPECT_NEAR(f(0.0), -14.5, 1e-6);
}

TEST(Mitigate, FitCovarianceCoversTruth) {
  int covered = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    FitOptions o;
    o.bootstrap_resamples = 50;
    o.seed = static_cast<std::uint64_t>(t);
    const ExpFit f = fit_exponential(exponential_series(-10.0, 0.25, -3.0, {1, 3, 5, 7, 9}, 0.05,
                                                        static_cast<std::uint64_t>(t)),
                                     o);
    if (std::abs(f(0.0) + 13.0) < 2 * std::sqrt(f.covariance.sum())) ++covered;
  }
  EXPECT_GE(covered, trials * 3 / 4);
}

TEST(Mitigate, FitNeedsThreePoints) {
  EXPECT_THROW(fit_exponential(exponential_series(-1.0, 0.2, 0.0, {1, 3})), DomainError);
}

TEST(Mitigate, RescaleRecoversSharedDecay) {
  // Global depolarising towards a traceless state: both series decay to zero at the same rate.
  const double e = -20.139037, ref = -18.0, b = 0.21;
  const ExpFit fe = fit_exponential(exponential_series(e * std::exp(-0.01), b, 0.0, {1, 3, 5, 7}));
  const ExpFit fb = fit_exponential(exponential_series(ref * std::exp(-0.01), b, 0.0, {1, 3, 5, 7}));
  EXPECT_NEAR(rzne_correct(fe, fb, ref).e_exp, e, 1e-6);
}

TEST(Mitigate, RescaleAlgebraWithOffsets) {
  ExpFit fe, fb;
  fe.a = -15.0, fe.b = 0.2, fe.c = -4.0;
  fb.a = -12.0, fb.b = 0.2, fb.c = -3.0;
  const MitigationResult r = rzne_correct(fe, fb, -18.0);
  EXPECT_NEAR(r.r, 1.25, 1e-15);
  EXPECT_NEAR(r.e_exp, -15.0 * 1.25 - 4.0, 1e-13);
  EXPECT_NEAR(r.naive_extrapolation, -19.0 * -18.0 / -15.0, 1e-13);
}

TEST(Mitigate, QodIsSevenOverRate) {
  EXPECT_NEAR(qod(0.567), 7.0 / 0.567, 1e-14);
  double prev = qod(0.01);
  for (double b = 0.02; b < 3.0; b += 0.01) {
    const double q = qod(b);
    EXPECT_LT(q, prev);
    prev = q;
  }
  EXPECT_THROW(qod(0.0), DomainError);
}

TEST(Mitigate, ZneSeriesRecordsOddM) {
  const std::vector<int> n{0, 1, 2, 3};
  const ZNESeries s = zne_series(Circuit(2), n, [](const FoldedCircuit& f) {
    return EnergyEstimate{static_cast<double>(f.m()), 0.1};
  });
  ASSERT_EQ(s.points.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s.points[i].m, static_cast<int>(2 * i + 1));
  EXPECT_NO_THROW(s.validate(4));
}
