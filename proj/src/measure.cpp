#include "chainvqe/measure.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

namespace chainvqe {

namespace {

using nlohmann::json;

void check_shots(std::int64_t shots) {
  if (shots < 1) throw ArgumentError("shot count must be at least 1");
}

// Mean and standard error of a per-shot quantity given as weighted values.
struct Accumulator {
  double sum = 0.0;
  double sum2 = 0.0;
  std::int64_t n = 0;

  void add(double v, std::int64_t count) {
    sum += v * static_cast<double>(count);
    sum2 += v * v * static_cast<double>(count);
    n += count;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double variance_of_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return var / static_cast<double>(n);
  }
};

const Coupling& coupling_of(const std::vector<BondTerm>& bonds, int a, int b) {
  for (const auto& t : bonds) {
    if ((t.site_a == a && t.site_b == b) || (t.site_a == b && t.site_b == a)) return t.coupling;
  }
  throw ArgumentError("no bond term for the measured pair");
}

double spin(char bit) { return bit == '1' ? -1.0 : 1.0; }

std::vector<Coupling> pair_couplings(const ChainSpec& spec, const std::vector<std::pair<int, int>>& pairs) {
  const auto bonds = build_hamiltonian(spec);
  std::vector<Coupling> out;
  for (const auto& [a, b] : pairs) out.push_back(coupling_of(bonds, a, b));
  return out;
}

}  // namespace

ShotSource dense_source(DenseState state, NoiseModel readout, std::uint64_t seed) {
  readout.validate();
  return [state = std::move(state), readout = std::move(readout), seed](
             const Circuit& basis_change, std::int64_t shots, std::uint64_t stream) {
    DenseState s = state;
    s.apply(basis_change);
    return sample(s, readout, shots, derive_seed(seed, "dense-source", stream));
  };
}

ShotSource trajectory_source(FoldedCircuit prep, NoiseModel noise, std::uint64_t seed, int n_trajectories) {
  noise.validate();
  if (n_trajectories < 1) throw ArgumentError("need at least one trajectory");
  return [prep = std::move(prep), noise = std::move(noise), seed, n_trajectories](
             const Circuit& basis_change, std::int64_t shots, std::uint64_t stream) {
    const FoldedTrajectoryRunner runner(prep, basis_change, noise);
    const std::uint64_t stream_seed = derive_seed(seed, "trajectory-source", stream);
    const auto t_count = std::min<std::int64_t>(n_trajectories, std::max<std::int64_t>(shots, 1));
    ShotRecord total;
    total.seed = stream_seed;
    for (std::int64_t t = 0; t < t_count; ++t) {
      const std::int64_t n = shots / t_count + (t < shots % t_count ? 1 : 0);
      if (n == 0) continue;
      const DenseState s = runner.run(stream_seed, static_cast<std::uint64_t>(t));
      total.merge(sample(s, noise, n, derive_seed(stream_seed, "shots", static_cast<std::uint64_t>(t))));
    }
    return total;
  };
}

ShotSource mps_source(ComplexMps state, NoiseModel readout, std::uint64_t seed) {
  readout.validate();
  return [state = std::move(state), readout = std::move(readout), seed](
             const Circuit& basis_change, std::int64_t shots, std::uint64_t stream) {
    ComplexMps s = state;
    for (const auto& g : basis_change.gates()) {
      if (g.kind == GateKind::cnot) {
        Matrix4c cx = Matrix4c::Zero();
        cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1.0;
        s.apply_two_site_routed(cx, g.q0, g.q1);
      } else {
        s.apply_one_site(native_matrix_1q(g), g.q0);
      }
    }
    return s.sample(shots, derive_seed(seed, "mps-source", stream), readout);
  };
}

int bell_outcome(char b_first, char b_second) {
  return (b_first == '1' ? 1 : 0) + 2 * (b_second == '1' ? 1 : 0);
}

BellHistogram bell_histogram(const ShotRecord& record, std::vector<std::pair<int, int>> pairs,
                             BondParity parity) {
  BellHistogram h;
  h.parity = parity;
  h.pairs = std::move(pairs);
  h.counts.assign(h.pairs.size(), {0, 0, 0, 0});
  h.shots = record.shots;
  for (const auto& [bits, n] : record.counts) {
    for (std::size_t k = 0; k < h.pairs.size(); ++k) {
      const auto [a, b] = h.pairs[k];
      h.counts[k][static_cast<std::size_t>(
          bell_outcome(bits[static_cast<std::size_t>(a)], bits[static_cast<std::size_t>(b)]))] += n;
    }
  }
  return h;
}

BellMeasurement energy_bell(const ShotSource& source, const ChainSpec& spec, std::int64_t shots) {
  check_shots(shots);
  BellMeasurement out;
  double var = 0.0;
  const Circuit empty(spec.n_sites);
  std::uint64_t stream = 0;
  for (BondParity parity : {BondParity::odd, BondParity::even}) {
    const auto pairs = parity_pairs(spec, parity);
    const Circuit tail = append_measurement_basis(empty, spec, MeasurementSetting::bell(parity));
    const ShotRecord rec = source(tail, shots, stream++);
    const auto couplings = pair_couplings(spec, pairs);
    Accumulator acc;
    for (const auto& [bits, n] : rec.counts) {
      double v = 0.0;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [a, b] = pairs[k];
        const auto e = bell_state_energies(couplings[k]);
        v += e[static_cast<std::size_t>(bell_outcome(bits[static_cast<std::size_t>(a)],
                                                     bits[static_cast<std::size_t>(b)]))];
      }
      acc.add(v, n);
    }
    out.estimate.energy += acc.mean();
    var += acc.variance_of_mean();
    out.histograms.push_back(bell_histogram(rec, pairs, parity));
  }
  out.estimate.stderr = std::sqrt(var);
  return out;
}

EnergyEstimate bell_energy_from_histograms(const std::vector<BellHistogram>& histograms, const ChainSpec& spec) {
  const auto bonds = build_hamiltonian(spec);
  EnergyEstimate est;
  double var = 0.0;
  for (const auto& h : histograms) {
    if (h.shots < 1) throw ArgumentError("histogram without shots");
    for (std::size_t k = 0; k < h.pairs.size(); ++k) {
      const auto e = bell_state_energies(coupling_of(bonds, h.pairs[k].first, h.pairs[k].second));
      Accumulator acc;
      for (int o = 0; o < 4; ++o) acc.add(e[static_cast<std::size_t>(o)], h.counts[k][static_cast<std::size_t>(o)]);
      est.energy += acc.mean();
      var += acc.variance_of_mean();
    }
  }
  est.stderr = std::sqrt(var);
  return est;
}

EnergyEstimate energy_xyz(const ShotSource& source, const ChainSpec& spec, std::int64_t shots) {
  check_shots(shots);
  const auto bonds = build_hamiltonian(spec);
  const Circuit empty(spec.n_sites);
  EnergyEstimate est;
  double var = 0.0;
  std::uint64_t stream = 100;
  for (PauliBasis basis : {PauliBasis::x, PauliBasis::y, PauliBasis::z}) {
    const Circuit tail = append_measurement_basis(empty, spec, MeasurementSetting::pauli(basis));
    const ShotRecord rec = source(tail, shots, stream++);
    Accumulator acc;
    for (const auto& [bits, n] : rec.counts) {
      double v = 0.0;
      for (const auto& b : bonds) {
        const double j = basis == PauliBasis::x ? b.coupling.jx : basis == PauliBasis::y ? b.coupling.jy : b.coupling.jz;
        v += j * spin(bits[static_cast<std::size_t>(b.site_a)]) * spin(bits[static_cast<std::size_t>(b.site_b)]);
      }
      acc.add(v, n);
    }
    est.energy += acc.mean();
    var += acc.variance_of_mean();
  }
  est.stderr = std::sqrt(var);
  return est;
}

Matrix4c density_from_correlators(const std::array<std::array<double, 4>, 4>& c) {
  Matrix4c rho = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double v = (i == 0 && j == 0) ? 1.0 : c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (int r = 0; r < 4; ++r) {
        for (int col = 0; col < 4; ++col) rho(r, col) += v * pauli(i)(r / 2, col / 2) * pauli(j)(r % 2, col % 2);
      }
    }
  }
  return rho / 4.0;
}

Matrix4c project_psd(const Matrix4c& rho) {
  const Matrix4c h = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (!(tr > 0.0)) throw ArgumentError("density matrix has no positive weight");
  ev /= tr;
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

TomographyResult pairwise_tomography(const ShotSource& source, const ChainSpec& spec, std::int64_t shots) {
  check_shots(shots);
  const auto bonds = build_hamiltonian(spec);
  const Circuit empty(spec.n_sites);
  const PauliBasis bases[3] = {PauliBasis::x, PauliBasis::y, PauliBasis::z};
  TomographyResult out;
  if (shots < 1000) out.warnings.push_back("fewer than 1000 shots per setting; tomography estimates are noisy");
  double var = 0.0;
  std::uint64_t stream = 200;
  for (BondParity parity : {BondParity::odd, BondParity::even}) {
    const auto pairs = parity_pairs(spec, parity);
    const auto couplings = pair_couplings(spec, pairs);
    // corr[k][i][j] accumulates <sigma_i sigma_j>; singles are averaged over 3 settings.
    std::vector<std::array<std::array<double, 4>, 4>> corr(pairs.size());
    for (auto& c : corr) {
      for (auto& row : c) row.fill(0.0);
    }
    for (int ia = 0; ia < 3; ++ia) {
      for (int ib = 0; ib < 3; ++ib) {
        const Circuit tail =
            append_measurement_basis(empty, spec, MeasurementSetting::tomography(parity, bases[ia], bases[ib]));
        const ShotRecord rec = source(tail, shots, stream++);
        Accumulator diag;
        for (const auto& [bits, n] : rec.counts) {
          double v = 0.0;
          for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double sa = spin(bits[static_cast<std::size_t>(pairs[k].first)]);
            const double sb = spin(bits[static_cast<std::size_t>(pairs[k].second)]);
            const double w = static_cast<double>(n) / static_cast<double>(rec.shots);
            corr[k][static_cast<std::size_t>(ia + 1)][static_cast<std::size_t>(ib + 1)] += w * sa * sb;
            corr[k][static_cast<std::size_t>(ia + 1)][0] += w * sa / 3.0;
            corr[k][0][static_cast<std::size_t>(ib + 1)] += w * sb / 3.0;
            if (ia == ib) {
              const Coupling& c = couplings[k];
              const double j = ia == 0 ? c.jx : ia == 1 ? c.jy : c.jz;
              v += j * sa * sb;
            }
          }
          if (ia == ib) diag.add(v, n);
        }
        if (ia == ib) var += diag.variance_of_mean();
      }
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      PairDensityMatrix p;
      p.site_a = pairs[k].first;
      p.site_b = pairs[k].second;
      p.raw = density_from_correlators(corr[k]);
      p.projected = project_psd(p.raw);
      out.estimate.energy += (p.raw * bond_matrix(couplings[k])).trace().real();
      out.pairs.push_back(std::move(p));
    }
  }
  out.estimate.stderr = std::sqrt(var);
  return out;
}

double concurrence(const Matrix4c& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) throw ArgumentError("concurrence: matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw ArgumentError("concurrence: trace is not 1");
  const Matrix4c h = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h);
  if (es.eigenvalues().minCoeff() < -1e-8) throw ArgumentError("concurrence: matrix is not positive semidefinite");
  // sqrt(rho) via the eigenbasis, then the Hermitian form sqrt(rho) rho~ sqrt(rho).
  const Eigen::Vector4d sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c root = es.eigenvectors() * sq.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = yy(3, 0) = -1.0;
  yy(1, 2) = yy(2, 1) = 1.0;
  const Matrix4c tilde = yy * h.conjugate() * yy;
  const Matrix4c m = root * tilde * root;
  Eigen::SelfAdjointEigenSolver<Matrix4c> ms((m + m.adjoint()) / 2.0);
  // Rounding leaves eigenvalues ~1e-17 where rank-deficient states have exact zeros;
  // their square roots (~1e-9) would otherwise leak into the result.
  const double floor = 1e-14 * std::max(1.0, ms.eigenvalues().maxCoeff());
  Eigen::Vector4d lambda = ms.eigenvalues().unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
  std::sort(lambda.data(), lambda.data() + 4, std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

std::string to_json(const BellHistogram& h) {
  json j;
  j["parity"] = h.parity == BondParity::odd ? "odd" : "even";
  j["shots"] = h.shots;
  json bonds = json::array();
  for (std::size_t k = 0; k < h.pairs.size(); ++k) {
    bonds.push_back({{"sites", {h.pairs[k].first, h.pairs[k].second}},
                     {"counts", {{"phi_plus", h.counts[k][0]},
                                 {"phi_minus", h.counts[k][1]},
                                 {"psi_plus", h.counts[k][2]},
                                 {"psi_minus", h.counts[k][3]}}}});
  }
  j["bonds"] = std::move(bonds);
  return j.dump();
}

std::string to_json(const TomographyResult& t) {
  json j;
  j["energy"] = t.estimate.energy;
  j["stderr"] = t.estimate.stderr;
  j["warnings"] = t.warnings;
  json pairs = json::array();
  for (const auto& p : t.pairs) {
    json re = json::array(), im = json::array();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        re.push_back(p.projected(r, c).real());
        im.push_back(p.projected(r, c).imag());
      }
    }
    pairs.push_back({{"sites", {p.site_a, p.site_b}}, {"rho_re", re}, {"rho_im", im},
                     {"concurrence", concurrence(p.projected)}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump();
}

}  // namespace chainvqe
