#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/model.hpp"
#include "chainvqe/mps.hpp"

namespace chainvqe {

using Evaluator = std::function<double(const AnsatzParams&)>;

/// Exact energy of the ansatz state (dense up to 24 qubits).
Evaluator dense_evaluator(const ChainSpec& spec);
Evaluator mps_evaluator(const ChainSpec& spec, MpsOptions options = {});

enum class OptimizerMethod { nelder_mead, spsa };

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::nelder_mead;
  int max_evaluations = 20000;
  /// Nelder-Mead stops when the simplex energy spread falls below this.
  double tol_energy = 1e-9;
  /// Additional Nelder-Mead runs restarted from the best point with fresh simplices.
  int restarts = 4;
  double initial_step = 0.05;
  // SPSA gains a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma.
  int spsa_iterations = 300;
  double spsa_a = 0.05;
  double spsa_c = 0.05;
  double spsa_A = 20.0;
  double spsa_alpha = 0.602;
  double spsa_gamma = 0.101;
  std::uint64_t seed = 0;
  /// Fold the reported angles into their periodicity window.
  bool canonicalize = true;
};

struct TrajectoryPoint {
  int iteration = 0;
  int evaluations = 0;
  double energy = 0.0;
};

struct OptimizationRecord {
  AnsatzParams best;
  double best_energy = 0.0;
  int evaluations = 0;
  /// Best energy after each iteration; non-increasing.
  std::vector<TrajectoryPoint> trajectory;
  bool hit_evaluation_cap = false;

  std::string to_jsonl() const;
};

/// {"tying": ..., "layers": [{"even": [x, y, z], "odd": ..., "rung": ...}, ...]}
std::string params_to_json(const AnsatzParams& p);

/// Called with every accepted trajectory point (for JSON-lines streaming).
using ProgressCallback = std::function<void(const TrajectoryPoint&)>;

OptimizationRecord minimize_energy(const Evaluator& evaluator, const ChainSpec& spec, const AnsatzParams& init,
                                   const OptimizerConfig& config = {}, const ProgressCallback& progress = {});

/// Default 1-layer start used for Table-1 runs, (theta_even, theta_odd) = (0.1, 0.2).
AnsatzParams default_init(const ChainSpec& spec, int n_layers, Tying tying);

/// Appends a layer of small angles (default 1e-3) to warm-start a deeper ansatz.
AnsatzParams pad_layer(const AnsatzParams& p, double angle = 1e-3);

enum class Backend { dense, mps };

struct LayerSweepRow {
  int layers = 0;
  double energy = 0.0;
  double gs_energy = 0.0;
  double eps = 0.0;
  double fidelity = 0.0;
  AnsatzParams params;
};

struct LayerSweepOptions {
  Backend backend = Backend::dense;
  MpsOptions mps;
  ItebdOptions itebd;
  Tying tying = Tying::heisenberg;
  OptimizerConfig optimizer;
  /// Ground-state energy to compare against; computed when absent.
  std::optional<double> gs_energy;
};

std::vector<LayerSweepRow> layer_sweep(const ChainSpec& spec, int max_layers, const LayerSweepOptions& options = {});

struct ThermoFit {
  double e_inf = 0.0;
  double slope = 0.0;
  double e_inf_stderr = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> residuals;  // per input point, in energy per site
};

/// Least squares of energy / N = e_inf + slope / N.  Optional per-point energy
/// errors weight the fit.
ThermoFit thermo_fit(const std::vector<std::pair<int, double>>& points, const std::vector<double>& stderrs = {});

}  // namespace chainvqe
