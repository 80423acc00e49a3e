#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/measure.hpp"
#include "chainvqe/model.hpp"

namespace chainvqe {

enum class AssignmentKind { computational, bell };

/// Column j is the outcome distribution when state j is prepared.  States and
/// outcomes are indexed b_first + 2 b_second; for the Bell kind that is
/// Phi+, Phi-, Psi+, Psi-.
struct AssignmentMatrix {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  AssignmentKind kind = AssignmentKind::computational;
  std::pair<int, int> pair{0, 1};
  std::int64_t shots_per_state = 0;

  void validate() const;
};

constexpr std::int64_t kDefaultCalibrationShots = 10000;

/// Prepares the four computational states of the pair and reads them out.
AssignmentMatrix calibrate_readout(std::pair<int, int> pair, std::int64_t shots, const NoiseModel& noise,
                                   std::uint64_t seed);

/// Prepares the four Bell states (H + CNOT with Pauli frames) and applies the
/// Bell readout, so CNOT errors of the readout circuit are captured as well.
AssignmentMatrix calibrate_bell(std::pair<int, int> pair, std::int64_t shots, const NoiseModel& noise,
                                std::uint64_t seed);

/// Largest condition number accepted by unfold_distribution.
constexpr double kMaxAssignmentCondition = 1e8;

/// argmin over the probability simplex of |M p - measured|_2.
std::array<double, 4> unfold_distribution(const Eigen::Matrix4d& m, const std::array<double, 4>& measured);

struct MitigatedEnergy {
  EnergyEstimate estimate;
  EnergyEstimate raw;
};

/// Key: measured pair (first, second).
using AssignmentTable = std::map<std::pair<int, int>, AssignmentMatrix>;

AssignmentTable calibrate_bell_all(const ChainSpec& spec, std::int64_t shots, const NoiseModel& noise,
                                   std::uint64_t seed);

/// Unfolds every bond's Bell histogram and sums the bond energies.  The standard
/// error comes from a multinomial bootstrap over the histogram counts.
MitigatedEnergy mitigated_bell_energy(const std::vector<BellHistogram>& histograms, const AssignmentTable& matrices,
                                      const ChainSpec& spec, int resamples = 200, std::uint64_t seed = 0);

struct ZnePoint {
  int m = 1;
  double energy = 0.0;
  double stderr = 0.0;
};

struct ZNESeries {
  std::vector<ZnePoint> points;

  /// m odd and strictly increasing; at least `min_points` points.
  void validate(std::size_t min_points = 1) const;
};

/// Runs `estimator` on fold(base, n) for each n and records m = 2n + 1.
ZNESeries zne_series(const Circuit& base, std::span<const int> n_list,
                     const std::function<EnergyEstimate(const FoldedCircuit&)>& estimator);

struct FitOptions {
  int grid_points = 400;
  int bootstrap_resamples = 200;
  std::uint64_t seed = 0;
  int max_iterations = 500;
};

/// f(m) = a exp(-b m) + c.
struct ExpFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  /// Order (a, b, c); the larger of the linearised and bootstrap estimates.
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d covariance_linear = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d covariance_bootstrap = Eigen::Matrix3d::Zero();
  /// sqrt of the weighted sum of squared residuals.
  double residual_norm = 0.0;
  int bootstrap_failures = 0;

  double operator()(double m) const;
  double sigma(int i) const;
};

ExpFit fit_exponential(const ZNESeries& series, const FitOptions& options = {});

struct MitigationResult {
  double e_exp = 0.0;
  double sigma = 0.0;
  double r = 0.0;
  double naive_extrapolation = 0.0;
  /// Averaged when the two decay rates agree within 3 combined sigma, else the ansatz value.
  double qod = 0.0;
  double qod_sigma = 0.0;
  double qod_ansatz = 0.0;
  double qod_reference = 0.0;
  bool qod_averaged = false;
};

/// Reference-state rescaling: a_B r + c_B = e_ref_exact, e_exp = a_E r + c_E.
MitigationResult rzne_correct(const ExpFit& fit_e, const ExpFit& fit_b, double e_ref_exact);

/// Quantum observable depth 7 / b (7 CNOT layers per U).
double qod(double b);

std::string to_json(const ZNESeries& s);
std::string to_csv(const ZNESeries& s);
std::string to_json(const ExpFit& f);
std::string to_json(const MitigationResult& r);

}  // namespace chainvqe
