// Acceptance checks, one per criterion.  Prints one PASS/FAIL line each;
// exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "chainvqe/experiment.hpp"

using namespace chainvqe;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct TableRow {
  int n;
  double theta_even, theta_odd, e_ansatz, e_gs, eps_percent, f;
};

// Published open-chain Heisenberg results (MPS, chi = 64).
const std::vector<TableRow> kTable1 = {
    {4, 0.151748, 0.215765, -6.464102, -6.464102, 0.0, 1.0000},
    {6, 0.141671, 0.216088, -9.880996, -9.974309, 0.94, 0.9923},
    {8, 0.138569, 0.216093, -13.299823, -13.499730, 1.48, 0.9796},
    {10, 0.13710, 0.216102, -16.719307, -17.032141, 1.84, 0.9639},
    {12, 0.136248, 0.216110, -20.139037, -20.568363, 2.09, 0.9462},
    {14, 0.135688, 0.216115, -23.558885, -24.106899, 2.27, 0.9271},
    {16, 0.135293, 0.216120, -26.978800, -27.646949, 2.42, 0.9072},
    {18, 0.134999, 0.216123, -30.398756, -31.188044, 2.53, 0.8867},
    {20, 0.134773, 0.216126, -33.818738, -34.729893, 2.62, 0.8659},
    {30, 0.134132, 0.216134, -50.918850, -52.445423, 2.91, 0.7614},
    {40, 0.133832, 0.216139, -68.019098, -70.165893, 3.06, 0.6629},
    {50, 0.133658, 0.216141, -85.119397, -87.888441, 3.15, 0.5737},
    {60, 0.133544, 0.216143, -102.219721, -105.612060, 3.21, 0.4946},
    {70, 0.133464, 0.216144, -119.320058, -123.336305, 3.26, 0.4253},
    {80, 0.133405, 0.216145, -136.420403, -141.060947, 3.29, 0.3649},
    {90, 0.133359, 0.216146, -153.520754, -158.785857, 3.32, 0.3126},
    {98, 0.133329, 0.216146, -167.201038, -172.965924, 3.33, 0.2760},
    {100, 0.133323, 0.216146, -170.621109, -176.510957, 3.34, 0.2675},
    {102, 0.133316, 0.216146, -174.041180, -180.055995, 3.34, 0.2592},
};

const TableRow& table_row(int n) {
  return *std::find_if(kTable1.begin(), kTable1.end(), [n](const TableRow& r) { return r.n == n; });
}

AnsatzParams heisenberg_one_layer(double even, double odd) {
  const std::vector<std::pair<double, double>> eo{{even, odd}};
  return AnsatzParams::heisenberg(eo);
}

AnsatzParams optimise_dense(const ChainSpec& spec, int layers, Tying tying, std::uint64_t seed) {
  OptimizerConfig c;
  c.seed = seed;
  AnsatzParams init = default_init(spec, 1, tying);
  OptimizationRecord rec;
  for (int l = 1; l <= layers; ++l) {
    if (l > 1) init = pad_layer(rec.best);
    rec = minimize_energy(dense_evaluator(spec), spec, init, c);
  }
  return rec.best;
}

// ---------------------------------------------------------------------------

Outcome table1_small() {
  Outcome o;
  double worst_e = 0.0, worst_theta = 0.0;
  for (int n : {4, 6, 8, 10, 12}) {
    const TableRow& t = table_row(n);
    const ChainSpec spec{n, 1.0};
    const OptimizationRecord r =
        minimize_energy(dense_evaluator(spec), spec, default_init(spec, 1, Tying::heisenberg));
    const SpectrumResult gs = exact_ground_state(spec);
    const double e_gs = gs.ground_energy();
    const double eps = (r.best_energy - e_gs) / std::abs(e_gs);
    const double f = fidelity(prepare_ansatz_state(spec, r.best), DenseState::from_real(n, *gs.ground_vector));
    const std::string tag = "N=" + std::to_string(n) + " ";
    o.check(std::abs(r.best.layers[0].even.x - t.theta_even) < 1e-3,
            tag + fmt("theta_even %.6f vs %.6f", r.best.layers[0].even.x, t.theta_even));
    o.check(std::abs(r.best.layers[0].odd.x - t.theta_odd) < 1e-3,
            tag + fmt("theta_odd %.6f vs %.6f", r.best.layers[0].odd.x, t.theta_odd));
    o.check(rel(r.best_energy, t.e_ansatz) < 1e-4, tag + fmt("E_ansatz %.6f vs %.6f", r.best_energy, t.e_ansatz));
    o.check(rel(e_gs, t.e_gs) < 1e-4, tag + fmt("E_gs %.6f vs %.6f", e_gs, t.e_gs));
    // The table prints eps in percent with two decimals.
    o.check(std::abs(100 * eps - t.eps_percent) <= 0.005 + 1e-9, tag + fmt("eps %.4f%% vs %.2f%%", 100 * eps, t.eps_percent));
    o.check(std::abs(f - t.f) < 1e-3, tag + fmt("f %.4f vs %.4f", f, t.f));
    worst_e = std::max({worst_e, rel(r.best_energy, t.e_ansatz), rel(e_gs, t.e_gs)});
    worst_theta = std::max({worst_theta, std::abs(r.best.layers[0].even.x - t.theta_even),
                            std::abs(r.best.layers[0].odd.x - t.theta_odd)});
  }
  if (o.pass) o.detail = fmt("worst energy deviation %.1e relative, worst angle %.1e", worst_e, worst_theta);
  return o;
}

Outcome table1_large() {
  Outcome o;
  const MpsOptions chi64{64, 1e-12};
  double worst = 0.0;
  for (int n : {50, 100, 102}) {
    const TableRow& t = table_row(n);
    const ChainSpec spec{n, 1.0};
    const double e = mps_ansatz_energy(spec, heisenberg_one_layer(t.theta_even, t.theta_odd), chi64).energy;
    const double gs = itebd_ground_state(spec, chi64).energy;
    const std::string tag = "N=" + std::to_string(n) + " ";
    o.check(rel(e, t.e_ansatz) < 1e-4, tag + fmt("E_ansatz %.6f vs %.6f", e, t.e_ansatz));
    o.check(rel(gs, t.e_gs) < 1e-4, tag + fmt("E_gs %.6f vs %.6f", gs, t.e_gs));
    worst = std::max({worst, rel(e, t.e_ansatz), rel(gs, t.e_gs)});
  }
  if (o.pass) o.detail = fmt("worst relative deviation %.1e", worst);
  return o;
}

Outcome bell_identity() {
  Outcome o;
  for (double delta : {-0.8, -0.3, 0.0, 0.5, 1.0, 1.4}) {
    for (int n : {2, 4, 8, 12, 16, 20}) {
      const ChainSpec spec{n, delta};
      const double exact = -(2.0 + delta) * n / 2.0;
      const double dense = expectation(run_exact(singlet_init_circuit(n)), build_hamiltonian(spec));
      o.check(std::abs(dense - exact) < 1e-12, fmt("dense N=%g delta=%g: %.15g", n, delta, dense));
      o.check(std::abs(bell_pair_energy(spec) - exact) < 1e-12, fmt("formula N=%g delta=%g", n, delta));
    }
    for (int n : {22, 50, 102}) {
      const ChainSpec spec{n, delta};
      ComplexMps m = mps_singlets(n);
      const double e = m.expectation(build_hamiltonian(spec));
      o.check(std::abs(e + (2.0 + delta) * n / 2.0) < 1e-12, fmt("MPS N=%g delta=%g: %.15g", n, delta, e));
    }
  }
  ComplexMps m = mps_singlets(102);
  const double e102 = m.expectation(build_hamiltonian({102, 1.0}));
  o.check(std::abs(e102 + 153.0) < 1e-12, fmt("N=102: %.15g", e102));
  if (o.pass) o.detail = fmt("N=102 Heisenberg: %.12f", e102);
  return o;
}

Outcome gap_positive() {
  Outcome o;
  std::vector<double> grid(51);
  for (int i = 0; i <= 50; ++i) grid[static_cast<std::size_t>(i)] = i / 50.0;
  for (double delta : {1.0, -0.8}) {
    double min_gap = 1e300;
    for (const auto& p : gap_scan({8, delta}, grid)) min_gap = std::min(min_gap, p.gap);
    o.check(min_gap > 0.0, fmt("delta=%g min gap %.3e", delta, min_gap));
    o.detail += (o.detail.empty() ? "" : ", ") + fmt("min gap(delta=%g) = %.4f", delta, min_gap);
  }
  return o;
}

Outcome rxyz_decomposition() {
  Outcome o;
  auto kron = [](const Matrix2c& a, const Matrix2c& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
  };
  const Matrix4c xx = kron(pauli(1), pauli(1)), yy = kron(pauli(2), pauli(2)), zz = kron(pauli(3), pauli(3));
  Rng rng = make_rng(5, "rxyz");
  double worst = 0.0;
  int bad_count = 0;
  for (int k = 0; k < 1000; ++k) {
    const double a = (uniform01(rng) - 0.5) * 4 * M_PI, b = (uniform01(rng) - 0.5) * 4 * M_PI,
                 c = (uniform01(rng) - 0.5) * 4 * M_PI;
    const Matrix4c g = Complex(0, -0.5) * (a * xx + b * yy + c * zz);
    const Matrix4c ref = g.exp();
    const Circuit circ = rxyz_native(a, b, c);
    worst = std::max(worst, phase_invariant_distance(circ.unitary(), ref));
    if (circ.cnot_count() != 3) ++bad_count;
  }
  o.check(worst < 1e-10, fmt("worst distance %.3e", worst));
  o.check(bad_count == 0, fmt("%g circuits without exactly 3 CNOTs", bad_count));
  if (o.pass) o.detail = fmt("worst distance %.2e over 1000 triples", worst);
  return o;
}

Outcome protocol_agreement() {
  Outcome o;
  const std::int64_t shots = 100000;
  double worst = 0.0;
  for (int i = 0; i <= 11; ++i) {
    const double delta = std::round((-0.8 + 0.2 * i) * 10) / 10;
    const ChainSpec spec{8, delta};
    const Tying tying = delta == 1.0 ? Tying::heisenberg : Tying::xxz;
    const DenseState s = prepare_ansatz_state(spec, optimise_dense(spec, 1, tying, 1));
    const auto seed = static_cast<std::uint64_t>(i);
    const EnergyEstimate e[3] = {energy_bell(dense_source(s, {}, derive_seed(seed, "bell")), spec, shots).estimate,
                                 energy_xyz(dense_source(s, {}, derive_seed(seed, "xyz")), spec, shots),
                                 pairwise_tomography(dense_source(s, {}, derive_seed(seed, "tomo")), spec, shots).estimate};
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        const double z = std::abs(e[a].energy - e[b].energy) / std::hypot(e[a].stderr, e[b].stderr);
        worst = std::max(worst, z);
        o.check(z < 3.0, fmt("delta=%g protocols %g differ by %.2f sigma", delta, 10 * a + b, z));
      }
  }
  if (o.pass) o.detail = fmt("largest pairwise deviation %.2f combined sigma", worst);
  return o;
}

Outcome mitigation_end_to_end() {
  Outcome o;
  std::vector<double> errors;
  int failures = 0;
  for (int n : {12, 16}) {
    const ChainSpec spec{n, 1.0};
    const AnsatzParams params = optimise_dense(spec, 1, Tying::heisenberg, 0);
    for (int k = 0; k < 20; ++k) {
      Rng rng = make_rng(2024, "device", static_cast<std::uint64_t>(100 * n + k));
      NoiseModel noise;
      noise.p2 = 0.005 + 0.015 * uniform01(rng);
      for (int q = 0; q < n; ++q) {
        const double f01 = 0.05 * uniform01(rng), f10 = 0.05 * uniform01(rng);
        noise.readout.push_back(NoiseModel::flip_matrix(f01, f10));
      }
      RzneOptions opt;
      opt.n_list = {0, 1, 2, 3};
      opt.shots = 40000;
      opt.seed = derive_seed(7, "pipeline", static_cast<std::uint64_t>(100 * n + k));
      const RzneRun run = run_rzne(spec, params, noise, opt);
      if (!run.result) {
        ++failures;
        errors.push_back(1.0);  // a failed fit counts as a miss
        continue;
      }
      errors.push_back(rel(run.result->e_exp, run.noiseless));
    }
  }
  std::sort(errors.begin(), errors.end());
  const auto pct = [&](double q) {
    // Nearest-rank percentile.
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(errors.size()))) - 1;
    return errors[std::min(idx, errors.size() - 1)];
  };
  const double median = 0.5 * (errors[errors.size() / 2 - 1] + errors[errors.size() / 2]);
  const double p90 = pct(0.9);
  o.check(median < 0.03, fmt("median %.4f", median));
  o.check(p90 < 0.05, fmt("90th percentile %.4f", p90));
  o.detail += (o.detail.empty() ? "" : "; ") +
              fmt("median %.2f%%, p90 %.2f%%, failed fits %g", 100 * median, 100 * p90, failures);
  return o;
}

Outcome rzne_algebra() {
  Outcome o;
  // Global depolarising data: E(m) = E0 exp(-b m) for both series, traceless H.
  const double e0 = -20.139037, ref = -18.0, b = 0.17;
  auto series = [&](double e) {
    ZNESeries s;
    for (int m : {1, 3, 5, 7}) s.points.push_back({m, e * std::exp(-b * m), 1e-3});
    return s;
  };
  const MitigationResult r = rzne_correct(fit_exponential(series(e0)), fit_exponential(series(ref)), ref);
  o.check(std::abs(r.e_exp - e0) < 1e-8, fmt("synthetic recovery error %.3e", std::abs(r.e_exp - e0)));

  // Published 102-site extrapolations; the drop a carries the full value when c = 0.
  ExpFit fe, fb;
  fe.a = -199.2, fe.b = 0.1, fe.c = 0.0;
  fb.a = -169.8, fb.b = 0.1, fb.c = 0.0;
  const MitigationResult p = rzne_correct(fe, fb, -153.0);
  o.check(std::abs(p.naive_extrapolation + 179.0) < 0.5, fmt("naive %.3f", p.naive_extrapolation));
  o.check(std::abs(p.e_exp + 179.1) < 0.5, fmt("full %.3f", p.e_exp));
  // Residual offsets shared by both fits leave the result near the naive value.
  fe.a = -194.2, fe.c = -5.0;
  fb.a = -164.8, fb.c = -5.0;
  const MitigationResult q = rzne_correct(fe, fb, -153.0);
  o.check(std::abs(q.e_exp + 179.1) < 0.5, fmt("full with offsets %.3f", q.e_exp));
  if (o.pass) o.detail = fmt("naive %.2f, full %.2f, full with offsets %.2f", p.naive_extrapolation, p.e_exp, q.e_exp);
  return o;
}

Outcome qod_check() {
  Outcome o;
  const double q = qod(0.567);
  o.check(q >= 11.6 && q <= 13.0, fmt("qod(0.567) = %.3f", q));
  double prev = qod(0.025);
  for (int i = 2; i <= 400; ++i) {
    const double v = qod(0.025 * i);
    if (!(v < prev)) o.check(false, fmt("not decreasing at b=%.3f", 0.025 * i));
    prev = v;
  }
  if (o.pass) o.detail = fmt("qod(0.567) = %.3f", q);
  return o;
}

Outcome layers(bool slow) {
  Outcome o;
  {
    const ChainSpec spec{12, 1.0};
    const auto rows = layer_sweep(spec, 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      o.check(rows[i].eps < rows[i - 1].eps, fmt("eps not decreasing at layer %g", static_cast<double>(i + 1)));
      o.check(rows[i].fidelity > rows[i - 1].fidelity, fmt("f not increasing at layer %g", static_cast<double>(i + 1)));
    }
    for (const auto& r : rows) o.detail += (o.detail.empty() ? "" : ", ") + fmt("L%g eps %.4f f %.4f", r.layers, r.eps, r.fidelity);
  }
  if (slow) {
    const ChainSpec spec{50, 1.0};
    LayerSweepOptions opt;
    opt.backend = Backend::mps;
    opt.mps = {64, 1e-12};
    opt.gs_energy = table_row(50).e_gs;
    const auto rows = layer_sweep(spec, 6, opt);
    const auto& last = rows.back();
    o.check(last.fidelity > 0.9, fmt("N=50 six layers f %.4f", last.fidelity));
    o.check(last.eps < 0.0025, fmt("N=50 six layers eps %.5f", last.eps));
    o.detail += fmt("; N=50 L6 eps %.5f f %.4f", last.eps, last.fidelity);
  }
  return o;
}

Outcome ladder() {
  Outcome o;
  for (double delta : {0.0, 0.5, 1.0}) {
    const ChainSpec spec{6, delta, Boundary::open, Geometry::two_leg_ladder};
    LayerSweepOptions opt;
    opt.tying = delta == 1.0 ? Tying::heisenberg : Tying::xxz;
    const auto rows = layer_sweep(spec, 2, opt);
    o.check(rows.back().eps < 1e-8, fmt("delta=%g eps %.3e", delta, rows.back().eps));
    o.detail += (o.detail.empty() ? "" : ", ") + fmt("delta=%g eps %.1e", delta, rows.back().eps);
  }
  return o;
}

Outcome thermodynamic() {
  Outcome o;
  std::vector<std::pair<int, double>> pts;
  for (const auto& r : kTable1)
    if (r.n >= 20) pts.emplace_back(r.n, r.e_gs);
  const double bethe = bethe_energy_density();
  const ThermoFit t = thermo_fit(pts);
  o.check(rel(t.e_inf, bethe) < 0.01, fmt("table fit %.4f", t.e_inf));

  ExperimentConfig c = parse_config(R"(
backend: {kind: mps, chi: 64}
noise: {p2: 0.01, readout_flip: 0.02}
sweep: {n_values: [8, 12, 16, 20, 24, 28, 32, 36, 40]}
seed: 2
)");
  const CommandOutput out = run_command("thermo", c);
  const auto it = std::find_if(out.files.begin(), out.files.end(), [](const auto& f) { return f.first == "thermo_fit.json"; });
  const double e_inf = nlohmann::json::parse(it->second).at("e_inf").get<double>();
  o.check(rel(e_inf, bethe) < 0.05, fmt("mitigated fit %.4f", e_inf));
  o.detail += (o.detail.empty() ? "" : "; ") + fmt("table fit %.4f (%.2f%%), ", t.e_inf, 100 * rel(t.e_inf, bethe)) +
              fmt("mitigated fit %.4f (%.2f%%)", e_inf, 100 * rel(e_inf, bethe));
  return o;
}

Outcome concurrence_pattern() {
  Outcome o;
  const ChainSpec spec{8, 1.0};
  const DenseState s = prepare_ansatz_state(spec, optimise_dense(spec, 1, Tying::heisenberg, 0));
  std::vector<double> odd;
  for (int k = 0; k < 4; ++k) odd.push_back(concurrence(reduced_density_matrix(s, 2 * k, 2 * k + 1)));
  for (int k = 0; k < 3; ++k) {
    const double c = concurrence(reduced_density_matrix(s, 2 * k + 1, 2 * k + 2));
    o.check(c == 0.0, fmt("even bond %g concurrence %.3e", k, c));
  }
  for (double c : odd) o.check(c > 0.0, fmt("odd concurrence %.3e", c));
  o.check(odd[0] > odd[1] && odd[3] > odd[2], "odd bonds do not fall off from the boundary");
  const double r = 1 / std::sqrt(2.0);
  const Eigen::Vector4cd singlet(0, r, -r, 0), product(1, 0, 0, 0);
  o.check(concurrence(singlet * singlet.adjoint()) == 1.0 || std::abs(concurrence(singlet * singlet.adjoint()) - 1.0) < 1e-15,
          "singlet concurrence is not 1");
  o.check(concurrence(product * product.adjoint()) == 0.0, "product concurrence is not 0");
  if (o.pass) o.detail = fmt("odd bonds %.4f %.4f ", odd[0], odd[1]) + fmt("%.4f %.4f", odd[2], odd[3]);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(bool)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> selected;
  bool slow = false;
  app.add_option("--criterion", selected, "criterion number(s); all when omitted");
  app.add_flag("--slow", slow, "include the multi-hour stretch goals");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "Table-1 reproduction, small N", [](bool) { return table1_small(); }},
      {2, "Table-1 reproduction, large N (MPS)", [](bool) { return table1_large(); }},
      {3, "Bell-pair energy identity", [](bool) { return bell_identity(); }},
      {4, "gap scan stays open", [](bool) { return gap_positive(); }},
      {5, "Rxyz three-CNOT decomposition", [](bool) { return rxyz_decomposition(); }},
      {6, "Bell, XYZ and tomography agree", [](bool) { return protocol_agreement(); }},
      {7, "rZNE end to end on simulated devices", [](bool) { return mitigation_end_to_end(); }},
      {8, "rZNE algebra", [](bool) { return rzne_algebra(); }},
      {9, "QOD", [](bool) { return qod_check(); }},
      {10, "layer improvement", [](bool s) { return layers(s); }},
      {11, "two-leg ladder, two layers exact", [](bool) { return ladder(); }},
      {12, "thermodynamic extrapolation", [](bool) { return thermodynamic(); }},
      {13, "concurrence pattern", [](bool) { return concurrence_pattern(); }},
  };
  // Runtime budgets in seconds.
  const std::map<int, double> budget = {{1, 120}, {2, 1800}, {4, 60}, {7, 1200}, {11, 120}};

  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(slow);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (const auto b = budget.find(c.id); b != budget.end() && secs > b->second) {
      out.check(false, fmt("runtime %.0f s over the %.0f s budget", secs, b->second));
    }
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.id, out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    ok = ok && out.pass;
  }
  return ok ? 0 : 1;
}
