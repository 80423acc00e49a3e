#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/dense.hpp"
#include "chainvqe/model.hpp"
#include "chainvqe/mps.hpp"

namespace chainvqe {

/// Produces shots of the prepared state after the given basis-change circuit.
/// `stream` distinguishes independent calls so that every setting gets its own
/// random numbers.
using ShotSource =
    std::function<ShotRecord(const Circuit& basis_change, std::int64_t shots, std::uint64_t stream)>;

/// Noiseless prepared state; readout confusion from `readout` is applied at sampling.
ShotSource dense_source(DenseState state, NoiseModel readout, std::uint64_t seed);

/// Noisy preparation by trajectories of U (U^-1 U)^n; shots are split evenly over
/// `n_trajectories` trajectories, each followed by the (noisy) basis change.
ShotSource trajectory_source(FoldedCircuit prep, NoiseModel noise, std::uint64_t seed, int n_trajectories);

/// Noiseless MPS; the basis change is applied to a copy of the state.
ShotSource mps_source(ComplexMps state, NoiseModel readout, std::uint64_t seed);

struct EnergyEstimate {
  double energy = 0.0;
  double stderr = 0.0;
};

/// Bell outcome counts per measured pair, ordered Phi+, Phi-, Psi+, Psi-.
struct BellHistogram {
  BondParity parity = BondParity::odd;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::array<std::int64_t, 4>> counts;
  std::int64_t shots = 0;
};

/// Outcome index b_first + 2 b_second of the Bell readout.
int bell_outcome(char b_first, char b_second);

BellHistogram bell_histogram(const ShotRecord& record, std::vector<std::pair<int, int>> pairs,
                             BondParity parity);

struct BellMeasurement {
  EnergyEstimate estimate;
  std::vector<BellHistogram> histograms;  // odd, then even
};

/// Two settings (bell_odd, bell_even).  The standard error is the per-shot spread
/// of each setting's summed bond energies, so correlations between bonds are kept.
BellMeasurement energy_bell(const ShotSource& source, const ChainSpec& spec, std::int64_t shots);

/// Energy of a set of histograms with the per-outcome bond energies.
EnergyEstimate bell_energy_from_histograms(const std::vector<BellHistogram>& histograms, const ChainSpec& spec);

/// Three settings measuring every qubit in X, Y, then Z.
EnergyEstimate energy_xyz(const ShotSource& source, const ChainSpec& spec, std::int64_t shots);

struct PairDensityMatrix {
  int site_a = 0;
  int site_b = 1;
  /// Linear-inversion estimate (Hermitian, trace 1, possibly not PSD).
  Matrix4c raw;
  /// Nearest PSD matrix by eigenvalue clipping and renormalisation.
  Matrix4c projected;
};

struct TomographyResult {
  std::vector<PairDensityMatrix> pairs;
  /// Sum of Tr(rho_raw h) over bonds; the unprojected estimate is unbiased.
  EnergyEstimate estimate;
  std::vector<std::string> warnings;
};

/// 9 Pauli-pair bases for each parity (18 settings).
TomographyResult pairwise_tomography(const ShotSource& source, const ChainSpec& spec, std::int64_t shots);

/// rho = (1/4) sum_{ij} c_ij sigma_i (x) sigma_j with c_00 = 1.
Matrix4c density_from_correlators(const std::array<std::array<double, 4>, 4>& c);

Matrix4c project_psd(const Matrix4c& rho);

/// Wootters concurrence.  Throws ArgumentError for non-Hermitian, non-unit-trace or
/// non-PSD input (tolerance 1e-8).
double concurrence(const Matrix4c& rho);

std::string to_json(const BellHistogram& h);
std::string to_json(const TomographyResult& t);

}  // namespace chainvqe
