#include "chainvqe/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "chainvqe/dense.hpp"

namespace chainvqe {

namespace {

using Vec = std::vector<double>;

struct Objective {
  const Evaluator& evaluator;
  Tying tying;
  Geometry geometry;
  int max_evaluations;
  int evaluations = 0;
  double best = std::numeric_limits<double>::infinity();
  Vec best_x;
  bool capped = false;

  double operator()(const Vec& x) {
    if (evaluations >= max_evaluations) {
      capped = true;
      return std::numeric_limits<double>::infinity();
    }
    ++evaluations;
    const double e = evaluator(AnsatzParams::from_vector(x, tying, geometry));
    if (!std::isfinite(e)) throw ArgumentError("evaluator returned a non-finite energy");
    if (e < best) {
      best = e;
      best_x = x;
    }
    return e;
  }
};

Vec axpy(const Vec& a, double s, const Vec& d) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * d[i];
  return out;
}

// One Nelder-Mead run; returns the number of iterations performed.
int nelder_mead(Objective& f, const Vec& start, const std::vector<Vec>& directions, double tol,
                std::vector<TrajectoryPoint>& trajectory, const ProgressCallback& progress) {
  const std::size_t n = start.size();
  std::vector<Vec> simplex{start};
  for (const auto& d : directions) simplex.push_back(axpy(start, 1.0, d));
  std::vector<double> values;
  for (const auto& x : simplex) values.push_back(f(x));
  int iteration = 0;
  while (!f.capped) {
    std::vector<std::size_t> order(simplex.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Vec> s2;
    std::vector<double> v2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex.swap(s2);
    values.swap(v2);

    ++iteration;
    const TrajectoryPoint point{static_cast<int>(trajectory.size()) + 1, f.evaluations, f.best};
    if (trajectory.empty() || point.energy < trajectory.back().energy) {
      trajectory.push_back(point);
      if (progress) progress(point);
    }
    double size = 0.0;
    for (std::size_t k = 1; k < simplex.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(simplex[k][i] - simplex[0][i]));
    }
    if (values.back() - values.front() <= tol || size < 1e-12) break;

    Vec centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);
    }
    Vec dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = centroid[i] - simplex[n][i];
    const Vec xr = axpy(centroid, 1.0, dir);
    const double fr = f(xr);
    if (fr < values[0]) {
      const Vec xe = axpy(centroid, 2.0, dir);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const Vec xc = outside ? axpy(centroid, 0.5, dir) : axpy(centroid, -0.5, dir);
    const double fc = f(xc);
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = xc;
      values[n] = fc;
      continue;
    }
    for (std::size_t k = 1; k < simplex.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
      values[k] = f(simplex[k]);
    }
  }
  return iteration;
}

std::vector<Vec> axis_directions(std::size_t n, double step) {
  std::vector<Vec> d(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = step;
  return d;
}

// Random orthogonal-ish directions for a restart, deterministic in (seed, restart).
std::vector<Vec> random_directions(std::size_t n, double step, std::uint64_t seed, int restart) {
  Rng rng = make_rng(seed, "nelder-mead-restart", static_cast<std::uint64_t>(restart));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform01(rng) - 0.5;
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  std::vector<Vec> d(n, Vec(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) d[k][i] = step * q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  }
  return d;
}

}  // namespace

Evaluator dense_evaluator(const ChainSpec& spec) {
  const auto bonds = build_hamiltonian(spec);
  return [spec, bonds](const AnsatzParams& p) { return expectation(prepare_ansatz_state(spec, p), bonds); };
}

Evaluator mps_evaluator(const ChainSpec& spec, MpsOptions options) {
  return [spec, options](const AnsatzParams& p) { return mps_ansatz_energy(spec, p, options).energy; };
}

std::string params_to_json(const AnsatzParams& p) {
  static const char* tyings[] = {"heisenberg", "xxz", "free"};
  auto bond = [](const BondAngles& b) { return nlohmann::json::array({b.x, b.y, b.z}); };
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) layers.push_back({{"even", bond(l.even)}, {"odd", bond(l.odd)}, {"rung", bond(l.rung)}});
  return nlohmann::json{{"tying", tyings[static_cast<int>(p.tying)]}, {"layers", layers}}.dump();
}

std::string OptimizationRecord::to_jsonl() const {
  std::string out;
  for (const auto& t : trajectory) {
    out += nlohmann::json{{"iteration", t.iteration}, {"evaluations", t.evaluations}, {"energy", t.energy}}.dump();
    out += '\n';
  }
  nlohmann::json fin{{"best_energy", best_energy}, {"evaluations", evaluations},
                     {"hit_evaluation_cap", hit_evaluation_cap}};
  fin["params"] = nlohmann::json::parse(params_to_json(best));
  out += fin.dump();
  out += '\n';
  return out;
}

OptimizationRecord minimize_energy(const Evaluator& evaluator, const ChainSpec& spec, const AnsatzParams& init,
                                   const OptimizerConfig& config, const ProgressCallback& progress) {
  spec.validate();
  init.validate();
  if (config.max_evaluations < 1) throw ArgumentError("max_evaluations must be >= 1");
  Objective f{evaluator, init.tying, spec.geometry, config.max_evaluations, 0, std::numeric_limits<double>::infinity(), {}, false};
  const Vec x0 = init.to_vector(spec.geometry);
  const double e0 = f(x0);
  OptimizationRecord rec;
  rec.trajectory.push_back({0, f.evaluations, e0});
  if (progress) progress(rec.trajectory.back());

  if (config.method == OptimizerMethod::nelder_mead) {
    nelder_mead(f, x0, axis_directions(x0.size(), config.initial_step), config.tol_energy, rec.trajectory, progress);
    const double steps[4] = {1.0, 0.3, 2.0, 0.1};
    for (int r = 0; r < config.restarts && !f.capped; ++r) {
      const Vec start = f.best_x;
      nelder_mead(f, start, random_directions(start.size(), config.initial_step * steps[r % 4], config.seed, r),
                  config.tol_energy, rec.trajectory, progress);
    }
  } else {
    // SPSA with simultaneous +-1 perturbations.
    Rng rng = make_rng(config.seed, "spsa");
    Vec x = x0;
    for (int k = 0; k < config.spsa_iterations && !f.capped; ++k) {
      const double ak = config.spsa_a / std::pow(k + 1 + config.spsa_A, config.spsa_alpha);
      const double ck = config.spsa_c / std::pow(k + 1, config.spsa_gamma);
      Vec delta(x.size());
      for (auto& d : delta) d = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      const double fp = f(axpy(x, ck, delta));
      const double fm = f(axpy(x, -ck, delta));
      if (f.capped) break;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= ak * (fp - fm) / (2.0 * ck * delta[i]);
      f(x);
      const TrajectoryPoint point{k + 1, f.evaluations, f.best};
      if (point.energy < rec.trajectory.back().energy) {
        rec.trajectory.push_back(point);
        if (progress) progress(point);
      }
    }
  }

  rec.evaluations = f.evaluations;
  rec.hit_evaluation_cap = f.capped;
  rec.best_energy = f.best;
  rec.best = AnsatzParams::from_vector(f.best_x, init.tying, spec.geometry);
  if (config.canonicalize) rec.best = rec.best.canonical();
  return rec;
}

AnsatzParams default_init(const ChainSpec& spec, int n_layers, Tying tying) {
  if (n_layers < 1) throw ArgumentError("need at least one layer");
  AnsatzParams p = AnsatzParams::zeros(1, tying);
  auto& layer = p.layers[0];
  layer.even = BondAngles::isotropic(0.1);
  layer.odd = BondAngles::isotropic(0.2);
  if (spec.geometry == Geometry::two_leg_ladder) layer.rung = BondAngles::isotropic(0.1);
  for (int k = 1; k < n_layers; ++k) p = pad_layer(p);
  return p;
}

AnsatzParams pad_layer(const AnsatzParams& p, double angle) {
  AnsatzParams out = p;
  LayerAngles layer;
  layer.even = layer.odd = layer.rung = BondAngles::isotropic(angle);
  out.layers.push_back(layer);
  return out;
}

std::vector<LayerSweepRow> layer_sweep(const ChainSpec& spec, int max_layers, const LayerSweepOptions& options) {
  spec.validate();
  if (max_layers < 1) throw ArgumentError("max_layers must be >= 1");
  const auto bonds = build_hamiltonian(spec);
  const bool dense = options.backend == Backend::dense;

  double gs_energy = 0.0;
  std::optional<DenseState> gs_dense;
  std::optional<RealMps> gs_mps;
  if (dense) {
    const SpectrumResult s = exact_ground_state(spec);
    gs_energy = s.ground_energy();
    gs_dense = DenseState::from_real(spec.n_sites, *s.ground_vector);
  } else {
    ItebdResult r = itebd_ground_state(spec, options.mps, options.itebd);
    gs_energy = r.energy;
    gs_mps = std::move(r.state);
  }
  if (options.gs_energy) gs_energy = *options.gs_energy;

  const Evaluator eval = dense ? dense_evaluator(spec) : mps_evaluator(spec, options.mps);
  std::vector<LayerSweepRow> rows;
  AnsatzParams start = default_init(spec, 1, options.tying);
  for (int layers = 1; layers <= max_layers; ++layers) {
    if (layers > 1) start = pad_layer(rows.back().params);
    const OptimizationRecord rec = minimize_energy(eval, spec, start, options.optimizer);
    LayerSweepRow row;
    row.layers = layers;
    row.energy = rec.best_energy;
    row.gs_energy = gs_energy;
    row.eps = std::abs(rec.best_energy - gs_energy) / std::abs(gs_energy);
    row.params = rec.best;
    if (dense) {
      row.fidelity = fidelity(prepare_ansatz_state(spec, rec.best), *gs_dense);
    } else {
      row.fidelity = mps_overlap(mps_ansatz_state(spec, rec.best, options.mps), *gs_mps);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ThermoFit thermo_fit(const std::vector<std::pair<int, double>>& points, const std::vector<double>& stderrs) {
  if (!stderrs.empty() && stderrs.size() != points.size()) throw ArgumentError("one standard error per point");
  std::vector<int> ns;
  for (const auto& p : points) {
    if (p.first < 1) throw ArgumentError("thermo_fit: N must be positive");
    ns.push_back(p.first);
  }
  std::sort(ns.begin(), ns.end());
  if (std::unique(ns.begin(), ns.end()) - ns.begin() < 3) throw ArgumentError("thermo_fit needs at least 3 distinct N");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [sites, e] = points[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = 1.0 / sites;
    y[i] = e / sites;
    const double s = stderrs.empty() ? 1.0 : stderrs[static_cast<std::size_t>(i)] / sites;
    if (!(s > 0.0)) throw ArgumentError("thermo_fit: standard errors must be positive");
    w[i] = 1.0 / (s * s);
  }
  const Eigen::MatrixXd aw = w.cwiseSqrt().asDiagonal() * a;
  const Eigen::VectorXd yw = w.cwiseSqrt().asDiagonal() * y;
  const Eigen::Vector2d coef = aw.colPivHouseholderQr().solve(yw);
  ThermoFit fit;
  fit.e_inf = coef[0];
  fit.slope = coef[1];
  const Eigen::VectorXd res = y - a * coef;
  fit.residuals.assign(res.data(), res.data() + res.size());
  const Eigen::Matrix2d cov0 = (aw.transpose() * aw).inverse();
  double scale = 1.0;
  if (n > 2) {
    const double chi2 = (w.array() * res.array().square()).sum();
    scale = stderrs.empty() ? chi2 / static_cast<double>(n - 2) : std::max(1.0, chi2 / static_cast<double>(n - 2));
  }
  fit.e_inf_stderr = std::sqrt(cov0(0, 0) * scale);
  fit.slope_stderr = std::sqrt(cov0(1, 1) * scale);
  return fit;
}

}  // namespace chainvqe
