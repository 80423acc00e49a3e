#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chainvqe/dense.hpp"
#include "chainvqe/optimize.hpp"

using namespace chainvqe;

TEST(Optimize, ConstantObjectiveKeepsInitialPoint) {
  const ChainSpec spec{4, 1.0};
  const AnsatzParams init = default_init(spec, 1, Tying::heisenberg);
  const OptimizationRecord r = minimize_energy([](const AnsatzParams&) { return 1.5; }, spec, init);
  EXPECT_EQ(r.best.to_vector(spec.geometry), init.to_vector(spec.geometry));
  EXPECT_EQ(r.best_energy, 1.5);
}

TEST(Optimize, FindsMinimumOfSmoothFunction) {
  const ChainSpec spec{4, 1.0};
  auto f = [](const AnsatzParams& p) {
    const auto& l = p.layers[0];
    return std::pow(l.even.x - 0.3, 2) + 2 * std::pow(l.odd.x - 0.1, 2) - 1.0;
  };
  OptimizerConfig c;
  c.canonicalize = false;
  const OptimizationRecord r = minimize_energy(f, spec, default_init(spec, 1, Tying::heisenberg), c);
  EXPECT_NEAR(r.best.layers[0].even.x, 0.3, 1e-4);
  EXPECT_NEAR(r.best.layers[0].odd.x, 0.1, 1e-4);
  EXPECT_NEAR(r.best_energy, -1.0, 1e-8);
}

TEST(Optimize, TrajectoryIsNonIncreasing) {
  const ChainSpec spec{8, 1.0};
  const OptimizationRecord r =
      minimize_energy(dense_evaluator(spec), spec, default_init(spec, 1, Tying::heisenberg));
  ASSERT_FALSE(r.trajectory.empty());
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    EXPECT_LE(r.trajectory[i].energy, r.trajectory[i - 1].energy);
    EXPECT_GE(r.trajectory[i].evaluations, r.trajectory[i - 1].evaluations);
  }
  EXPECT_DOUBLE_EQ(r.trajectory.back().energy, r.best_energy);
}

TEST(Optimize, EvaluationCapIsReported) {
  const ChainSpec spec{8, 1.0};
  OptimizerConfig c;
  c.max_evaluations = 15;
  const OptimizationRecord r = minimize_energy(dense_evaluator(spec), spec, default_init(spec, 1, Tying::heisenberg), c);
  EXPECT_TRUE(r.hit_evaluation_cap);
  EXPECT_LE(r.evaluations, 15);
}

TEST(Optimize, SpsaImprovesOnStart) {
  const ChainSpec spec{6, 1.0};
  OptimizerConfig c;
  c.method = OptimizerMethod::spsa;
  c.seed = 4;
  const AnsatzParams init = default_init(spec, 1, Tying::heisenberg);
  const Evaluator e = dense_evaluator(spec);
  const OptimizationRecord r = minimize_energy(e, spec, init, c);
  EXPECT_LT(r.best_energy, e(init));
}

TEST(Optimize, DenseAndMpsEvaluatorsAgree) {
  const ChainSpec spec{10, 0.6};
  const AnsatzParams p = default_init(spec, 2, Tying::xxz);
  EXPECT_NEAR(dense_evaluator(spec)(p), mps_evaluator(spec, {128, 0.0})(p), 1e-10);
}

TEST(Optimize, JsonLinesEndWithSummary) {
  const ChainSpec spec{4, 1.0};
  const OptimizationRecord r = minimize_energy(dense_evaluator(spec), spec, default_init(spec, 1, Tying::heisenberg));
  const std::string s = r.to_jsonl();
  const auto lines = std::count(s.begin(), s.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines), r.trajectory.size() + 1);
  EXPECT_NE(s.rfind("best_energy"), std::string::npos);
}

TEST(Optimize, LayerSweepImprovesMonotonically) {
  const ChainSpec spec{8, 1.0};
  const auto rows = layer_sweep(spec, 3);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].eps, rows[i - 1].eps);
    EXPECT_GT(rows[i].fidelity, rows[i - 1].fidelity);
  }
}

TEST(Optimize, ThermoFitRecoversLine) {
  std::vector<std::pair<int, double>> pts;
  for (int n : {10, 20, 30, 40}) pts.emplace_back(n, n * (-1.75 + 0.4 / n));
  const ThermoFit f = thermo_fit(pts);
  EXPECT_NEAR(f.e_inf, -1.75, 1e-12);
  EXPECT_NEAR(f.slope, 0.4, 1e-10);
  for (double r : f.residuals) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(Optimize, ThermoFitIgnoresPointOrder) {
  std::vector<std::pair<int, double>> pts{{8, -13.2}, {12, -20.3}, {16, -26.6}, {20, -33.7}, {40, -67.7}};
  std::vector<double> err{0.09, 0.12, 0.13, 0.16, 0.3};
  const ThermoFit a = thermo_fit(pts, err);
  std::vector<std::size_t> idx{3, 0, 4, 2, 1};
  std::vector<std::pair<int, double>> p2;
  std::vector<double> e2;
  for (auto i : idx) {
    p2.push_back(pts[i]);
    e2.push_back(err[i]);
  }
  const ThermoFit b = thermo_fit(p2, e2);
  EXPECT_NEAR(a.e_inf, b.e_inf, 1e-12);
  EXPECT_NEAR(a.e_inf_stderr, b.e_inf_stderr, 1e-12);
}

TEST(Optimize, ThermoFitNeedsThreeSizes) {
  EXPECT_THROW(thermo_fit({{4, -6.0}, {8, -13.0}}), DomainError);
}
