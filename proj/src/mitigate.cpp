#include "chainvqe/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace chainvqe {

namespace {

using nlohmann::json;

// Two-qubit circuits on qubits (0 = first, 1 = second).
Circuit computational_prep(int state) {
  Circuit c(2);
  if (state & 1) c.x(0);
  if (state & 2) c.x(1);
  return c;
}

Circuit bell_prep(int state) {
  Circuit c = computational_prep(state);
  c.h(0);
  c.cnot(0, 1);
  return c;
}

Circuit bell_readout() {
  Circuit c(2);
  c.cnot(0, 1);
  c.h(0);
  return c;
}

AssignmentMatrix calibrate(std::pair<int, int> pair, std::int64_t shots, const NoiseModel& noise,
                           std::uint64_t seed, AssignmentKind kind) {
  if (shots < 1) throw ArgumentError("calibration needs at least one shot per state");
  noise.validate();
  const NoiseModel local = noise.restricted_to_pair(pair.first, pair.second);
  AssignmentMatrix out;
  out.kind = kind;
  out.pair = pair;
  out.shots_per_state = shots;
  out.m.setZero();
  const char* tag = kind == AssignmentKind::bell ? "calibrate-bell" : "calibrate-readout";
  for (int j = 0; j < 4; ++j) {
    Circuit c = kind == AssignmentKind::bell ? bell_prep(j) : computational_prep(j);
    if (kind == AssignmentKind::bell) c.append(bell_readout());
    const std::uint64_t state_seed = derive_seed(seed, tag, static_cast<std::uint64_t>(j));
    std::array<std::int64_t, 4> counts{0, 0, 0, 0};
    const auto add = [&](const ShotRecord& rec) {
      for (const auto& [bits, n] : rec.counts) counts[static_cast<std::size_t>(bell_outcome(bits[0], bits[1]))] += n;
    };
    if (local.has_gate_noise()) {
      // One trajectory per shot: the pair is tiny and this samples the channel exactly.
      for (std::int64_t s = 0; s < shots; ++s) {
        const DenseState st = run_trajectory(c, local, state_seed, static_cast<std::uint64_t>(s));
        add(sample(st, local, 1, derive_seed(state_seed, "shot", static_cast<std::uint64_t>(s))));
      }
    } else {
      add(sample(run_exact(c), local, shots, state_seed));
    }
    for (int i = 0; i < 4; ++i) {
      out.m(i, j) = static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(shots);
    }
  }
  return out;
}

double bell_pair_value(const std::array<double, 4>& p, const std::array<double, 4>& e) {
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += p[static_cast<std::size_t>(k)] * e[static_cast<std::size_t>(k)];
  return v;
}

double condition_number(const Eigen::Matrix4d& m) {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(m);
  const auto& s = svd.singularValues();
  if (s[3] <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[3];
}

// ---- exponential fit ---------------------------------------------------------

struct FitData {
  std::vector<double> m;
  std::vector<double> y;
  std::vector<double> w;  // 1 / sigma^2
};

double model(const Eigen::Vector3d& p, double m) { return p[0] * std::exp(-p[1] * m) + p[2]; }

double chi2(const FitData& d, const Eigen::Vector3d& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.m.size(); ++i) {
    const double r = d.y[i] - model(p, d.m[i]);
    s += d.w[i] * r * r;
  }
  return s;
}

Eigen::MatrixXd jacobian(const FitData& d, const Eigen::Vector3d& p) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(d.m.size()), 3);
  for (std::size_t i = 0; i < d.m.size(); ++i) {
    const double e = std::exp(-p[1] * d.m[i]);
    const double sw = std::sqrt(d.w[i]);
    const auto r = static_cast<Eigen::Index>(i);
    j(r, 0) = sw * e;
    j(r, 1) = -sw * p[0] * d.m[i] * e;
    j(r, 2) = sw;
  }
  return j;
}

struct LmResult {
  Eigen::Vector3d p;
  double chi2 = 0.0;
  bool converged = false;
};

LmResult levenberg_marquardt(const FitData& d, Eigen::Vector3d p, int max_iterations) {
  double lambda = 1e-3;
  double current = chi2(d, p);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd j = jacobian(d, p);
    Eigen::VectorXd r(static_cast<Eigen::Index>(d.m.size()));
    for (std::size_t i = 0; i < d.m.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = std::sqrt(d.w[i]) * (d.y[i] - model(p, d.m[i]));
    }
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * std::max(1.0, current)) return {p, current, true};
    bool improved = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d a = jtj;
      for (int k = 0; k < 3; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      const Eigen::Vector3d step = a.ldlt().solve(g);
      const Eigen::Vector3d trial = p + step;
      const double next = chi2(d, trial);
      if (std::isfinite(next) && next <= current) {
        const bool tiny = step.norm() <= 1e-13 * (1.0 + p.norm());
        const bool flat = current - next <= 1e-15 * std::max(current, 1e-300);
        p = trial;
        current = next;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (tiny || flat) return {p, current, true};
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) return {p, current, true};  // no descent direction left: at a minimum
  }
  return {p, current, false};
}

struct Candidate {
  double chi2;
  Eigen::Vector3d p;
};

// Log-linear regression of |y - c| for a grid of c values.
std::vector<Candidate> grid_candidates(const FitData& d, int grid_points) {
  const auto [lo_it, hi_it] = std::minmax_element(d.y.begin(), d.y.end());
  const double lo = *lo_it, hi = *hi_it;
  const double range = hi - lo;
  std::vector<Candidate> out;
  for (int g = 0; g <= grid_points; ++g) {
    const double c = lo - 2.0 * range + (5.0 * range) * g / grid_points;
    double sign = 0.0;
    bool ok = true;
    for (double y : d.y) {
      const double z = y - c;
      if (std::abs(z) < 1e-12 * std::max(1.0, range)) { ok = false; break; }
      const double s = z > 0 ? 1.0 : -1.0;
      if (sign == 0.0) sign = s;
      if (s != sign) { ok = false; break; }
    }
    if (!ok) continue;
    // Weighted fit of ln|z| = alpha - b m, var(ln|z|) ~ sigma^2 / z^2.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < d.m.size(); ++i) {
      const double z = std::abs(d.y[i] - c);
      const double w = d.w[i] * z * z;
      const double ly = std::log(z);
      sw += w;
      sx += w * d.m[i];
      sy += w * ly;
      sxx += w * d.m[i] * d.m[i];
      sxy += w * d.m[i] * ly;
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0)) continue;
    const double slope = (sw * sxy - sx * sy) / det;
    const double alpha = (sy - slope * sx) / sw;
    const Eigen::Vector3d p(sign * std::exp(alpha), -slope, c);
    if (!(p[1] > 0.0) || !p.allFinite()) continue;
    out.push_back({chi2(d, p), p});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) { return x.chi2 < y.chi2; });
  return out;
}

FitData fit_data(const ZNESeries& s) {
  FitData d;
  bool all_zero = true;
  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& p : s.points) {
    if (p.stderr > 0.0) {
      all_zero = false;
      min_positive = std::min(min_positive, p.stderr);
    }
  }
  for (const auto& p : s.points) {
    d.m.push_back(p.m);
    d.y.push_back(p.energy);
    const double sigma = all_zero ? 1.0 : (p.stderr > 0.0 ? p.stderr : min_positive);
    d.w.push_back(1.0 / (sigma * sigma));
  }
  return d;
}

std::string describe(const Eigen::Vector3d& p) {
  std::ostringstream os;
  os << "a=" << p[0] << " b=" << p[1] << " c=" << p[2];
  return os.str();
}

}  // namespace

void AssignmentMatrix::validate() const {
  for (int j = 0; j < 4; ++j) {
    if (std::abs(m.col(j).sum() - 1.0) > 1e-6) throw ArgumentError("assignment matrix columns must sum to 1");
    for (int i = 0; i < 4; ++i) {
      if (m(i, j) < 0.0 || m(i, j) > 1.0) throw ArgumentError("assignment matrix entries must lie in [0, 1]");
    }
  }
}

AssignmentMatrix calibrate_readout(std::pair<int, int> pair, std::int64_t shots, const NoiseModel& noise,
                                   std::uint64_t seed) {
  return calibrate(pair, shots, noise, seed, AssignmentKind::computational);
}

AssignmentMatrix calibrate_bell(std::pair<int, int> pair, std::int64_t shots, const NoiseModel& noise,
                                std::uint64_t seed) {
  return calibrate(pair, shots, noise, seed, AssignmentKind::bell);
}

AssignmentTable calibrate_bell_all(const ChainSpec& spec, std::int64_t shots, const NoiseModel& noise,
                                   std::uint64_t seed) {
  AssignmentTable table;
  std::uint64_t k = 0;
  for (BondParity parity : {BondParity::odd, BondParity::even}) {
    for (const auto& pair : parity_pairs(spec, parity)) {
      table[pair] = calibrate_bell(pair, shots, noise, derive_seed(seed, "bond", k++));
    }
  }
  return table;
}

std::array<double, 4> unfold_distribution(const Eigen::Matrix4d& m, const std::array<double, 4>& measured) {
  double total = 0.0;
  for (double p : measured) {
    if (p < -1e-12 || !std::isfinite(p)) throw ArgumentError("measured distribution has negative entries");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ArgumentError("measured distribution must sum to 1");
  const double cond = condition_number(m);
  if (!(cond <= kMaxAssignmentCondition)) {
    throw ConditioningError("assignment matrix is too ill-conditioned to unfold", cond);
  }
  const Eigen::Vector4d y(measured[0], measured[1], measured[2], measured[3]);
  // Equality-constrained least squares on every support; the convex optimum is the
  // feasible candidate with the smallest residual.
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 4> out{};
  for (int mask = 1; mask < 16; ++mask) {
    std::vector<int> idx;
    for (int k = 0; k < 4; ++k) {
      if (mask & (1 << k)) idx.push_back(k);
    }
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd a(4, n);
    for (Eigen::Index k = 0; k < n; ++k) a.col(k) = m.col(idx[static_cast<std::size_t>(k)]);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
    kkt.topLeftCorner(n, n) = 2.0 * a.transpose() * a;
    kkt.block(0, n, n, 1).setOnes();
    kkt.block(n, 0, 1, n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = 2.0 * a.transpose() * y;
    rhs[n] = 1.0;
    const Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    if (!x.allFinite() || x.minCoeff() < -1e-12) continue;
    const double res = (a * x - y).squaredNorm();
    if (res < best - 1e-15) {
      best = res;
      out.fill(0.0);
      for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = std::max(0.0, x[k]);
    }
  }
  double s = 0.0;
  for (double p : out) s += p;
  for (double& p : out) p /= s;
  return out;
}

MitigatedEnergy mitigated_bell_energy(const std::vector<BellHistogram>& histograms, const AssignmentTable& matrices,
                                      const ChainSpec& spec, int resamples, std::uint64_t seed) {
  if (resamples < 2) throw ArgumentError("bootstrap needs at least two resamples");
  const auto bonds = build_hamiltonian(spec);
  struct Bond {
    const AssignmentMatrix* matrix;
    std::array<double, 4> energies;
    std::array<std::int64_t, 4> counts;
    std::int64_t shots;
  };
  std::vector<Bond> list;
  for (const auto& h : histograms) {
    for (std::size_t k = 0; k < h.pairs.size(); ++k) {
      const auto it = matrices.find(h.pairs[k]);
      if (it == matrices.end()) {
        throw ArgumentError("missing Bell calibration for bond (" + std::to_string(h.pairs[k].first) + ", " +
                            std::to_string(h.pairs[k].second) + ")");
      }
      if (it->second.kind != AssignmentKind::bell) throw ArgumentError("Bell histograms need Bell assignment matrices");
      const Coupling* c = nullptr;
      for (const auto& b : bonds) {
        if (std::minmax(b.site_a, b.site_b) == std::minmax(h.pairs[k].first, h.pairs[k].second)) c = &b.coupling;
      }
      if (!c) throw ArgumentError("histogram pair is not a bond of the model");
      list.push_back({&it->second, bell_state_energies(*c), h.counts[k], h.shots});
    }
  }
  const auto energy_of = [&](const std::vector<std::array<std::int64_t, 4>>& counts, bool unfold) {
    double e = 0.0;
    for (std::size_t k = 0; k < list.size(); ++k) {
      std::array<double, 4> p{};
      for (int o = 0; o < 4; ++o) {
        p[static_cast<std::size_t>(o)] =
            static_cast<double>(counts[k][static_cast<std::size_t>(o)]) / static_cast<double>(list[k].shots);
      }
      if (unfold) p = unfold_distribution(list[k].matrix->m, p);
      e += bell_pair_value(p, list[k].energies);
    }
    return e;
  };
  std::vector<std::array<std::int64_t, 4>> observed;
  for (const auto& b : list) observed.push_back(b.counts);

  MitigatedEnergy out;
  out.estimate.energy = energy_of(observed, true);
  out.raw = bell_energy_from_histograms(histograms, spec);

  Rng rng = make_rng(seed, "bell-bootstrap");
  double sum = 0.0, sum2 = 0.0;
  std::vector<std::array<std::int64_t, 4>> resampled(list.size());
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      // Multinomial draw by sequential binomials.
      std::int64_t left = list[k].shots;
      double mass = 1.0;
      for (int o = 0; o < 3; ++o) {
        const double p = static_cast<double>(observed[k][static_cast<std::size_t>(o)]) / static_cast<double>(list[k].shots);
        const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> bin(left, q);
        const std::int64_t n = left > 0 ? bin(rng) : 0;
        resampled[k][static_cast<std::size_t>(o)] = n;
        left -= n;
        mass -= p;
      }
      resampled[k][3] = left;
    }
    const double e = energy_of(resampled, true);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / resamples;
  out.estimate.stderr = std::sqrt(std::max(0.0, (sum2 - resamples * mean * mean) / (resamples - 1)));
  return out;
}

void ZNESeries::validate(std::size_t min_points) const {
  if (points.size() < min_points) {
    throw ArgumentError("ZNE series needs at least " + std::to_string(min_points) + " points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].m < 1 || points[i].m % 2 == 0) throw ArgumentError("ZNE m values must be odd and positive");
    if (i > 0 && points[i].m <= points[i - 1].m) throw ArgumentError("ZNE m values must strictly increase");
    if (!std::isfinite(points[i].energy) || !(points[i].stderr >= 0.0)) {
      throw ArgumentError("ZNE points need finite energies and non-negative errors");
    }
  }
}

ZNESeries zne_series(const Circuit& base, std::span<const int> n_list,
                     const std::function<EnergyEstimate(const FoldedCircuit&)>& estimator) {
  if (n_list.empty()) throw ArgumentError("zne_series: empty fold list");
  ZNESeries s;
  for (int n : n_list) {
    if (n < 0) throw ArgumentError("zne_series: fold counts must be non-negative");
    const FoldedCircuit f = fold(base, n);
    try {
      const EnergyEstimate e = estimator(f);
      s.points.push_back({f.m(), e.energy, e.stderr});
    } catch (const DomainError& e) {
      throw DomainError("ZNE point m = " + std::to_string(f.m()) + " failed: " + e.what());
    }
  }
  std::sort(s.points.begin(), s.points.end(), [](const ZnePoint& a, const ZnePoint& b) { return a.m < b.m; });
  s.validate();
  return s;
}

double ExpFit::operator()(double m) const { return a * std::exp(-b * m) + c; }

double ExpFit::sigma(int i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }

ExpFit fit_exponential(const ZNESeries& series, const FitOptions& options) {
  series.validate(3);
  const FitData d = fit_data(series);
  const auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*lo))) {
    throw FitError("series is constant in m; there is no decay to extrapolate");
  }
  const auto candidates = grid_candidates(d, options.grid_points);
  if (candidates.empty()) throw FitError("no decaying exponential is consistent with the series");

  LmResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < std::min<std::size_t>(3, candidates.size()); ++k) {
    const LmResult r = levenberg_marquardt(d, candidates[k].p, options.max_iterations);
    if (r.converged && r.p[1] > 0.0 && r.chi2 < best.chi2) best = r;
  }
  if (!std::isfinite(best.chi2)) {
    throw FitError("exponential fit did not converge to a decaying solution; grid start " +
                   describe(candidates.front().p));
  }
  if (!(best.p[1] > 1e-9)) throw FitError("fitted decay rate is not positive: " + describe(best.p));

  ExpFit fit;
  fit.a = best.p[0];
  fit.b = best.p[1];
  fit.c = best.p[2];
  fit.residual_norm = std::sqrt(best.chi2);
  const Eigen::MatrixXd j = jacobian(d, best.p);
  const Eigen::Matrix3d jtj = j.transpose() * j;
  const int dof = static_cast<int>(d.m.size()) - 3;
  const double scale = dof > 0 ? std::max(1.0, best.chi2 / dof) : 1.0;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (!lu.isInvertible()) throw FitError("fit Jacobian is rank deficient: " + describe(best.p));
  fit.covariance_linear = lu.inverse() * scale;

  // Parametric bootstrap: perturb every point by its standard error and refit.
  bool have_errors = false;
  for (const auto& p : series.points) have_errors = have_errors || p.stderr > 0.0;
  if (have_errors && options.bootstrap_resamples > 1) {
    Rng rng = make_rng(options.seed, "fit-bootstrap");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Vector3d> samples;
    for (int r = 0; r < options.bootstrap_resamples; ++r) {
      FitData dr = d;
      for (std::size_t i = 0; i < dr.y.size(); ++i) dr.y[i] += normal(rng) / std::sqrt(d.w[i]);
      const LmResult lr = levenberg_marquardt(dr, best.p, options.max_iterations);
      if (lr.converged && lr.p[1] > 0.0 && lr.p.allFinite()) {
        samples.push_back(lr.p);
      } else {
        ++fit.bootstrap_failures;
      }
    }
    if (samples.size() > 1) {
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto& s : samples) mean += s;
      mean /= static_cast<double>(samples.size());
      for (const auto& s : samples) fit.covariance_bootstrap += (s - mean) * (s - mean).transpose();
      fit.covariance_bootstrap /= static_cast<double>(samples.size() - 1);
    }
  }
  double ratio = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (fit.covariance_linear(i, i) > 0.0) {
      ratio = std::max(ratio, fit.covariance_bootstrap(i, i) / fit.covariance_linear(i, i));
    }
  }
  fit.covariance = fit.covariance_linear * ratio;
  return fit;
}

double qod(double b) {
  if (!(b > 0.0)) throw ArgumentError("QOD needs a positive decay rate");
  return 7.0 / b;
}

MitigationResult rzne_correct(const ExpFit& fit_e, const ExpFit& fit_b, double e_ref_exact) {
  if (std::abs(fit_b.a) <= 1e-12 * std::max(1.0, std::abs(fit_b.c))) {
    throw ArgumentError("reference fit amplitude a_B is zero; the rescale factor is undefined");
  }
  MitigationResult r;
  r.r = (e_ref_exact - fit_b.c) / fit_b.a;
  r.e_exp = fit_e.a * r.r + fit_e.c;
  const double ref_at_zero = fit_b.a + fit_b.c;
  r.naive_extrapolation = ref_at_zero != 0.0 ? (fit_e.a + fit_e.c) * e_ref_exact / ref_at_zero
                                             : std::numeric_limits<double>::quiet_NaN();
  const Eigen::Vector3d ge(r.r, 0.0, 1.0);
  const Eigen::Vector3d gb(-fit_e.a * r.r / fit_b.a, 0.0, -fit_e.a / fit_b.a);
  r.sigma = std::sqrt(std::max(0.0, ge.dot(fit_e.covariance * ge) + gb.dot(fit_b.covariance * gb)));

  r.qod_ansatz = qod(fit_e.b);
  r.qod_reference = qod(fit_b.b);
  const double se = fit_e.sigma(1), sb = fit_b.sigma(1);
  const double combined = std::sqrt(se * se + sb * sb);
  r.qod_averaged = std::abs(fit_e.b - fit_b.b) <= 3.0 * combined;
  if (r.qod_averaged) {
    r.qod = 0.5 * (r.qod_ansatz + r.qod_reference);
    const double qe = 7.0 * se / (fit_e.b * fit_e.b);
    const double qb = 7.0 * sb / (fit_b.b * fit_b.b);
    r.qod_sigma = 0.5 * std::sqrt(qe * qe + qb * qb);
  } else {
    r.qod = r.qod_ansatz;
    r.qod_sigma = 7.0 * se / (fit_e.b * fit_e.b);
  }
  return r;
}

std::string to_json(const ZNESeries& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back({{"m", p.m}, {"energy", p.energy}, {"stderr", p.stderr}});
  return json{{"points", pts}}.dump();
}

std::string to_csv(const ZNESeries& s) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "m,energy,stderr\n";
  for (const auto& p : s.points) os << p.m << ',' << p.energy << ',' << p.stderr << '\n';
  return os.str();
}

std::string to_json(const ExpFit& f) {
  json cov = json::array();
  for (int i = 0; i < 3; ++i) cov.push_back({f.covariance(i, 0), f.covariance(i, 1), f.covariance(i, 2)});
  return json{{"a", f.a}, {"b", f.b}, {"c", f.c}, {"covariance", cov}, {"residual_norm", f.residual_norm},
              {"bootstrap_failures", f.bootstrap_failures}}
      .dump();
}

std::string to_json(const MitigationResult& r) {
  return json{{"e_exp", r.e_exp},
              {"sigma", r.sigma},
              {"r", r.r},
              {"naive_extrapolation", r.naive_extrapolation},
              {"qod", r.qod},
              {"qod_sigma", r.qod_sigma},
              {"qod_ansatz", r.qod_ansatz},
              {"qod_reference", r.qod_reference},
              {"qod_averaged", r.qod_averaged}}
      .dump();
}

}  // namespace chainvqe
