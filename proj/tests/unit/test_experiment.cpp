#include <gtest/gtest.h>

#include <sstream>

#include "chainvqe/experiment.hpp"

using namespace chainvqe;

TEST(Config, EmptyTextGivesDefaults) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.model.n_sites, 8);
  EXPECT_EQ(c.mitigation.n_list, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Config, ReadsEverySection) {
  const ExperimentConfig c = parse_config(R"(
model: {n_sites: 6, delta: 0.5, geometry: ladder, boundary: open}
ansatz: {layers: 2, tying: xxz}
backend: {kind: mps, chi: 32, cutoff: 1e-10}
noise: {p2: 0.01, readout_flip: 0.02}
measurement: {protocol: all, shots: 500, repetitions: 3}
mitigation: {n_list: [0, 2], shots: 1000}
optimizer: {method: spsa, restarts: 1}
sweep: {n_values: [4, 8], deltas: [0.1]}
seed: 42
)");
  EXPECT_EQ(c.model.geometry, Geometry::two_leg_ladder);
  EXPECT_EQ(c.ansatz.tying, TyingChoice::xxz);
  EXPECT_EQ(c.backend.kind, Backend::mps);
  EXPECT_EQ(c.backend.chi, 32);
  EXPECT_DOUBLE_EQ(c.noise.p2, 0.01);
  EXPECT_EQ(c.measurement.repetitions, 3);
  EXPECT_EQ(c.mitigation.n_list, (std::vector<int>{0, 2}));
  EXPECT_EQ(c.optimizer.method, OptimizerMethod::spsa);
  EXPECT_EQ(c.sweep.deltas, (std::vector<double>{0.1}));
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("model: {sites: 4}"), ConfigError);
  EXPECT_THROW(parse_config("extras: {}"), ConfigError);
  EXPECT_THROW(parse_config("model: {n_sites: four}"), ConfigError);
  EXPECT_THROW(parse_config("model: {geometry: triangle}"), ConfigError);
  EXPECT_THROW(parse_config("noise: {p2: 1.5}"), ConfigError);
  EXPECT_THROW(parse_config("measurement: {protocol: magic}"), ConfigError);
  EXPECT_THROW(parse_config("model: [1, 2]"), ConfigError);
  EXPECT_THROW(parse_config("a: b: c"), ConfigError);
}

TEST(Config, ResolvedEchoRoundTrips) {
  ExperimentConfig c = parse_config("model: {n_sites: 10, delta: -0.4}\nansatz: {params: [0.1, 0.2]}\nseed: 9\n");
  const std::string y = resolved_config_yaml(c);
  const ExperimentConfig back = parse_config(y);
  EXPECT_EQ(resolved_config_yaml(back), y);
  EXPECT_EQ(back.model.n_sites, 10);
  ASSERT_TRUE(back.ansatz.params);
  EXPECT_EQ(*back.ansatz.params, (std::vector<double>{0.1, 0.2}));
}

TEST(Config, AutomaticTyingDependsOnDelta) {
  const ExperimentConfig c;
  EXPECT_EQ(c.tying_for(1.0), Tying::heisenberg);
  EXPECT_EQ(c.tying_for(0.5), Tying::xxz);
}

TEST(Commands, OutputsAreByteIdenticalForSameSeed) {
  ExperimentConfig c = parse_config("model: {n_sites: 6}\nmeasurement: {protocol: all, shots: 2000}\nseed: 5\n");
  const CommandOutput a = run_command("measure", c);
  const CommandOutput b = run_command("measure", c);
  EXPECT_EQ(a.files, b.files);
  c.seed = 6;
  EXPECT_NE(run_command("measure", c).files, a.files);
}

TEST(Commands, EveryCommandEchoesConfig) {
  const ExperimentConfig c = parse_config("model: {n_sites: 4}\nsweep: {n_values: [4], s_points: 3, deltas: [1.0], max_layers: 1}\n");
  for (const char* name : {"table1", "gap-scan", "optimize", "circuit"}) {
    const CommandOutput out = run_command(name, c);
    ASSERT_FALSE(out.files.empty());
    EXPECT_EQ(out.files.front().first, "config.resolved.yaml");
    EXPECT_EQ(out.files.front().second, resolved_config_yaml(c));
  }
}

TEST(Commands, Table1HeaderAndRows) {
  const ExperimentConfig c = parse_config("sweep: {n_values: [4, 6]}\n");
  const CommandOutput out = run_command("table1", c);
  std::istringstream is(out.files.at(1).second);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "N,theta_even,theta_odd,E_ansatz,E_gs,eps,fidelity");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Commands, Table1ReportsBadRowsWithoutAborting) {
  const ExperimentConfig c = parse_config("sweep: {n_values: [4, 5]}\n");
  const CommandOutput out = run_command("table1", c);
  EXPECT_NE(out.files.at(1).second.find("5,nan"), std::string::npos);
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Commands, NoiselessRzneSkipsExtrapolation) {
  const ExperimentConfig c =
      parse_config("model: {n_sites: 4}\nmitigation: {shots: 20000, calibration_shots: 2000, bootstrap: 20}\n");
  const ChainSpec spec = c.chain_spec();
  const AnsatzParams p = AnsatzParams::from_vector(std::vector<double>{0.151748, 0.215765}, Tying::heisenberg,
                                                   Geometry::chain);
  RzneOptions o;
  o.shots = 20000;
  o.bootstrap_resamples = 20;
  const RzneRun run = run_rzne(spec, p, {}, o);
  ASSERT_TRUE(run.result);
  EXPECT_FALSE(run.note.empty());
  EXPECT_NEAR(run.result->e_exp, run.noiseless, 4 * run.result->sigma);
}

TEST(Commands, UnknownCommandIsRejected) {
  EXPECT_THROW(run_command("nope", ExperimentConfig{}), DomainError);
  EXPECT_EQ(command_names().size(), 9u);
}
