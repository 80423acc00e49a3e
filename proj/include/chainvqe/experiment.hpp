#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/density.hpp"
#include "chainvqe/measure.hpp"
#include "chainvqe/mitigate.hpp"
#include "chainvqe/model.hpp"
#include "chainvqe/optimize.hpp"

namespace chainvqe {

/// How noisy preparations are simulated.  density_mps evolves the exact noisy
/// state and draws Bell shots from its pair marginals; trajectories samples
/// Pauli-error unravellings on the dense simulator (small N, much noisier).
enum class NoisyBackend { density_mps, trajectories };

struct RzneOptions {
  NoisyBackend backend = NoisyBackend::density_mps;
  MpsOptions density{128, 1e-12};
  std::vector<int> n_list{0, 1, 2, 3};
  std::int64_t shots = 40000;  // per setting and per point
  int trajectories = 20;
  std::int64_t calibration_shots = kDefaultCalibrationShots;
  int bootstrap_resamples = 200;
  FitOptions fit;
  std::uint64_t seed = 0;
};

struct RzneRun {
  double noiseless = 0.0;        // exact energy of the ansatz state
  double reference_exact = 0.0;  // Bell-pair product energy
  ZNESeries ansatz;
  ZNESeries reference;
  std::optional<ExpFit> fit_ansatz;
  std::optional<ExpFit> fit_reference;
  std::optional<MitigationResult> result;
  std::string error;  // set when a fit or the rescale failed; the series are kept
  std::string note;
};

/// Same circuit with every variational angle zero: it prepares the Bell-pair product
/// with the ansatz's CNOT structure.
Circuit reference_circuit(const ChainSpec& spec, int n_layers);

/// Ansatz and reference ZNE series on the noisy simulator, each point
/// Bell-mitigated with per-bond calibration, then fitted and rescaled.  Without
/// gate noise nothing decays: the fits are skipped and e_exp is the weighted mean
/// of the ansatz points.
RzneRun run_rzne(const ChainSpec& spec, const AnsatzParams& params, const NoiseModel& noise,
                 const RzneOptions& options);

std::string to_json(const RzneRun& run);

// ---------------------------------------------------------------------------
// Config-driven experiments.

enum class TyingChoice { automatic, heisenberg, xxz, free };

struct ExperimentConfig {
  struct Model {
    int n_sites = 8;
    double delta = 1.0;
    Geometry geometry = Geometry::chain;
    Boundary boundary = Boundary::open;
  } model;
  struct Ansatz {
    int layers = 1;
    TyingChoice tying = TyingChoice::automatic;  // heisenberg at delta = 1, xxz otherwise
    std::optional<std::vector<double>> params;   // flat vector; absent means optimise
  } ansatz;
  struct BackendConfig {
    Backend kind = Backend::dense;
    int chi = 64;
    double cutoff = 1e-12;
    int dense_max_sites = 16;  // sweeps switch to MPS above this
  } backend;
  struct Noise {
    double p1 = 0.0;
    double p2 = 0.0;
    double readout_flip = 0.0;
  } noise;
  struct Measurement {
    std::string protocol = "bell";  // bell | xyz | tomography | all
    std::int64_t shots = 100000;
    int repetitions = 1;
  } measurement;
  struct Mitigation {
    std::vector<int> n_list{0, 1, 2, 3};
    std::int64_t shots = 40000;
    std::int64_t calibration_shots = kDefaultCalibrationShots;
    int bootstrap = 200;
    NoisyBackend simulator = NoisyBackend::density_mps;
    int trajectories = 20;
  } mitigation;
  struct Optimizer {
    OptimizerMethod method = OptimizerMethod::nelder_mead;
    int max_evaluations = 20000;
    double tol_energy = 1e-9;
    int restarts = 4;
  } optimizer;
  struct Sweep {
    std::vector<int> n_values{4, 6, 8, 10, 12};
    std::vector<double> deltas;  // command default when empty
    int s_points = 51;
    int max_layers = 3;
  } sweep;
  std::uint64_t seed = 0;

  ChainSpec chain_spec() const;
  Tying tying_for(double delta) const;
  NoiseModel noise_model(int n_sites) const;
  OptimizerConfig optimizer_config(std::uint64_t seed_index = 0) const;
  MpsOptions mps_options() const { return {backend.chi, backend.cutoff}; }
};

/// Reads a YAML file; unknown keys and ill-typed values throw ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& yaml_text);
/// Every field, defaults included, as YAML.
std::string resolved_config_yaml(const ExperimentConfig& config);

struct CommandOutput {
  /// (file name, contents) written into the output directory in order.
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> warnings;
};

/// table1 | rzne | gap-scan | xxz-sweep | ladder | thermo | optimize | measure | circuit.
/// Progress lines (JSON) go to `log` when given.
CommandOutput run_command(const std::string& name, const ExperimentConfig& config, std::ostream* log = nullptr);

std::vector<std::string> command_names();
/// One-line description with the CSV columns of the command.
std::string command_help(const std::string& name);

}  // namespace chainvqe
