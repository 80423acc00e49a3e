#include "chainvqe/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include <json.hpp>

namespace chainvqe {

Circuit reference_circuit(const ChainSpec& spec, int n_layers) {
  return build_ansatz(spec, AnsatzParams::zeros(n_layers, Tying::free));
}

RzneRun run_rzne(const ChainSpec& spec, const AnsatzParams& params, const NoiseModel& noise,
                 const RzneOptions& options) {
  spec.validate();
  RzneRun run;
  run.noiseless = spec.n_sites <= kDefaultDenseQubitCap
                      ? expectation(prepare_ansatz_state(spec, params), build_hamiltonian(spec))
                      : mps_ansatz_energy(spec, params).energy;
  run.reference_exact = bell_pair_energy(spec);

  const AssignmentTable table =
      calibrate_bell_all(spec, options.calibration_shots, noise, derive_seed(options.seed, "calibration"));
  auto estimator = [&](std::uint64_t series) {
    return [&, series](const FoldedCircuit& f) {
      const std::uint64_t s = derive_seed(options.seed, series == 0 ? "ansatz" : "reference",
                                          static_cast<std::uint64_t>(f.n_folds));
      BellMeasurement bm;
      if (options.backend == NoisyBackend::density_mps) {
        DensityMps rho = DensityMps::zero_state(spec.n_sites, options.density);
        rho.run(f.circuit, noise);
        bm = density_bell_measurement(rho, spec, noise, options.shots, s);
      } else {
        bm = energy_bell(trajectory_source(f, noise, s, options.trajectories), spec, options.shots);
      }
      return mitigated_bell_energy(bm.histograms, table, spec, options.bootstrap_resamples,
                                   derive_seed(s, "bootstrap"))
          .estimate;
    };
  };
  run.ansatz = zne_series(build_ansatz(spec, params), options.n_list, estimator(0));
  run.reference = zne_series(reference_circuit(spec, params.n_layers()), options.n_list, estimator(1));

  if (!noise.has_gate_noise()) {
    double w = 0.0, mean = 0.0;
    for (const auto& p : run.ansatz.points) {
      const double wi = p.stderr > 0.0 ? 1.0 / (p.stderr * p.stderr) : 1.0;
      w += wi;
      mean += wi * p.energy;
    }
    MitigationResult r;
    r.e_exp = mean / w;
    r.sigma = std::sqrt(1.0 / w);
    r.r = 1.0;
    r.naive_extrapolation = r.e_exp;
    run.result = r;
    run.note = "no gate noise: extrapolation skipped, e_exp is the weighted mean over m";
    return run;
  }
  try {
    FitOptions fo = options.fit;
    fo.bootstrap_resamples = options.bootstrap_resamples;
    fo.seed = derive_seed(options.seed, "fit-ansatz");
    run.fit_ansatz = fit_exponential(run.ansatz, fo);
    fo.seed = derive_seed(options.seed, "fit-reference");
    run.fit_reference = fit_exponential(run.reference, fo);
    run.result = rzne_correct(*run.fit_ansatz, *run.fit_reference, run.reference_exact);
  } catch (const DomainError& e) {
    run.error = e.what();
  }
  return run;
}

std::string to_json(const RzneRun& run) {
  nlohmann::json j;
  j["noiseless"] = run.noiseless;
  j["reference_exact"] = run.reference_exact;
  j["ansatz_series"] = nlohmann::json::parse(to_json(run.ansatz));
  j["reference_series"] = nlohmann::json::parse(to_json(run.reference));
  if (run.fit_ansatz) j["fit_ansatz"] = nlohmann::json::parse(to_json(*run.fit_ansatz));
  if (run.fit_reference) j["fit_reference"] = nlohmann::json::parse(to_json(*run.fit_reference));
  if (run.result) j["result"] = nlohmann::json::parse(to_json(*run.result));
  if (!run.error.empty()) j["error"] = run.error;
  if (!run.note.empty()) j["note"] = run.note;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Config

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"model", {"n_sites", "delta", "geometry", "boundary"}},
    {"ansatz", {"layers", "tying", "params"}},
    {"backend", {"kind", "chi", "cutoff", "dense_max_sites"}},
    {"noise", {"p1", "p2", "readout_flip"}},
    {"measurement", {"protocol", "shots", "repetitions"}},
    {"mitigation", {"n_list", "shots", "calibration_shots", "bootstrap", "simulator", "trajectories"}},
    {"optimizer", {"method", "max_evaluations", "tol_energy", "restarts"}},
    {"sweep", {"n_values", "deltas", "s_points", "max_layers"}},
};

template <class T>
T scalar(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for " + where);
  }
}

template <class T>
std::vector<T> sequence(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) throw ConfigError("config: " + where + " must be a list");
  std::vector<T> out;
  for (const auto& e : n) out.push_back(scalar<T>(e, where));
  return out;
}

template <class E>
E choice(const YAML::Node& n, const std::string& where, const std::vector<std::pair<std::string, E>>& options) {
  const auto s = scalar<std::string>(n, where);
  for (const auto& [name, value] : options) {
    if (name == s) return value;
  }
  std::string allowed;
  for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
  throw ConfigError("config: " + where + " must be one of " + allowed + " (got '" + s + "')");
}

const std::vector<std::pair<std::string, Geometry>> kGeometries = {{"chain", Geometry::chain},
                                                                   {"ladder", Geometry::two_leg_ladder}};
const std::vector<std::pair<std::string, Boundary>> kBoundaries = {{"open", Boundary::open},
                                                                   {"periodic", Boundary::periodic}};
const std::vector<std::pair<std::string, TyingChoice>> kTyings = {{"auto", TyingChoice::automatic},
                                                                  {"heisenberg", TyingChoice::heisenberg},
                                                                  {"xxz", TyingChoice::xxz},
                                                                  {"free", TyingChoice::free}};
const std::vector<std::pair<std::string, Backend>> kBackends = {{"dense", Backend::dense}, {"mps", Backend::mps}};
const std::vector<std::pair<std::string, NoisyBackend>> kSimulators = {
    {"density_mps", NoisyBackend::density_mps}, {"trajectories", NoisyBackend::trajectories}};
const std::vector<std::pair<std::string, OptimizerMethod>> kMethods = {{"nelder_mead", OptimizerMethod::nelder_mead},
                                                                       {"spsa", OptimizerMethod::spsa}};

template <class E>
std::string name_of(E value, const std::vector<std::pair<std::string, E>>& options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "?";
}

void check_config(const ExperimentConfig& c) {
  if (c.model.n_sites < 2) throw ConfigError("config: model.n_sites must be >= 2");
  if (c.ansatz.layers < 1) throw ConfigError("config: ansatz.layers must be >= 1");
  if (c.backend.chi < 1) throw ConfigError("config: backend.chi must be >= 1");
  if (!(c.backend.cutoff >= 0.0)) throw ConfigError("config: backend.cutoff must be >= 0");
  for (double p : {c.noise.p1, c.noise.p2, c.noise.readout_flip}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("config: noise probabilities must lie in [0, 1]");
  }
  const std::set<std::string> protocols{"bell", "xyz", "tomography", "all"};
  if (!protocols.count(c.measurement.protocol)) {
    throw ConfigError("config: measurement.protocol must be bell, xyz, tomography or all");
  }
  if (c.measurement.shots < 1 || c.mitigation.shots < 1) throw ConfigError("config: shots must be >= 1");
  if (c.measurement.repetitions < 1) throw ConfigError("config: measurement.repetitions must be >= 1");
  if (c.mitigation.n_list.empty()) throw ConfigError("config: mitigation.n_list must not be empty");
  for (int n : c.mitigation.n_list) {
    if (n < 0) throw ConfigError("config: mitigation.n_list entries must be >= 0");
  }
  if (c.mitigation.calibration_shots < 1) throw ConfigError("config: mitigation.calibration_shots must be >= 1");
  if (c.mitigation.bootstrap < 0 || c.mitigation.trajectories < 1) throw ConfigError("config: bad mitigation counts");
  if (c.optimizer.max_evaluations < 1 || c.optimizer.restarts < 0) throw ConfigError("config: bad optimizer limits");
  if (c.sweep.s_points < 2) throw ConfigError("config: sweep.s_points must be >= 2");
  if (c.sweep.max_layers < 1) throw ConfigError("config: sweep.max_layers must be >= 1");
}

}  // namespace

ChainSpec ExperimentConfig::chain_spec() const {
  return ChainSpec{model.n_sites, model.delta, model.boundary, model.geometry};
}

Tying ExperimentConfig::tying_for(double delta) const {
  switch (ansatz.tying) {
    case TyingChoice::heisenberg:
      return Tying::heisenberg;
    case TyingChoice::xxz:
      return Tying::xxz;
    case TyingChoice::free:
      return Tying::free;
    case TyingChoice::automatic:
      break;
  }
  return delta == 1.0 ? Tying::heisenberg : Tying::xxz;
}

NoiseModel ExperimentConfig::noise_model(int n_sites) const {
  return NoiseModel::symmetric_readout(n_sites, noise.readout_flip, noise.p2, noise.p1);
}

OptimizerConfig ExperimentConfig::optimizer_config(std::uint64_t seed_index) const {
  OptimizerConfig o;
  o.method = optimizer.method;
  o.max_evaluations = optimizer.max_evaluations;
  o.tol_energy = optimizer.tol_energy;
  o.restarts = optimizer.restarts;
  o.seed = derive_seed(seed, "optimizer", seed_index);
  return o;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "seed") {
      c.seed = scalar<std::uint64_t>(kv.second, "seed");
      continue;
    }
    const auto it = kSchema.find(key);
    if (it == kSchema.end()) throw ConfigError("config: unknown section '" + key + "'");
    if (!kv.second.IsMap()) throw ConfigError("config: section '" + key + "' must be a mapping");
    for (const auto& f : kv.second) {
      const auto field = f.first.as<std::string>();
      if (!it->second.count(field)) throw ConfigError("config: unknown key '" + key + "." + field + "'");
    }
  }
  const std::string m = "model.", a = "ansatz.", b = "backend.", n = "noise.", ms = "measurement.", mi = "mitigation.",
                    o = "optimizer.", s = "sweep.";
  if (const auto x = root["model"]) {
    if (x["n_sites"]) c.model.n_sites = scalar<int>(x["n_sites"], m + "n_sites");
    if (x["delta"]) c.model.delta = scalar<double>(x["delta"], m + "delta");
    if (x["geometry"]) c.model.geometry = choice(x["geometry"], m + "geometry", kGeometries);
    if (x["boundary"]) c.model.boundary = choice(x["boundary"], m + "boundary", kBoundaries);
  }
  if (const auto x = root["ansatz"]) {
    if (x["layers"]) c.ansatz.layers = scalar<int>(x["layers"], a + "layers");
    if (x["tying"]) c.ansatz.tying = choice(x["tying"], a + "tying", kTyings);
    if (x["params"]) {
      if (x["params"].IsScalar() && x["params"].as<std::string>() == "optimize") {
        c.ansatz.params.reset();
      } else {
        c.ansatz.params = sequence<double>(x["params"], a + "params");
      }
    }
  }
  if (const auto x = root["backend"]) {
    if (x["kind"]) c.backend.kind = choice(x["kind"], b + "kind", kBackends);
    if (x["chi"]) c.backend.chi = scalar<int>(x["chi"], b + "chi");
    if (x["cutoff"]) c.backend.cutoff = scalar<double>(x["cutoff"], b + "cutoff");
    if (x["dense_max_sites"]) c.backend.dense_max_sites = scalar<int>(x["dense_max_sites"], b + "dense_max_sites");
  }
  if (const auto x = root["noise"]) {
    if (x["p1"]) c.noise.p1 = scalar<double>(x["p1"], n + "p1");
    if (x["p2"]) c.noise.p2 = scalar<double>(x["p2"], n + "p2");
    if (x["readout_flip"]) c.noise.readout_flip = scalar<double>(x["readout_flip"], n + "readout_flip");
  }
  if (const auto x = root["measurement"]) {
    if (x["protocol"]) c.measurement.protocol = scalar<std::string>(x["protocol"], ms + "protocol");
    if (x["shots"]) c.measurement.shots = scalar<std::int64_t>(x["shots"], ms + "shots");
    if (x["repetitions"]) c.measurement.repetitions = scalar<int>(x["repetitions"], ms + "repetitions");
  }
  if (const auto x = root["mitigation"]) {
    if (x["n_list"]) c.mitigation.n_list = sequence<int>(x["n_list"], mi + "n_list");
    if (x["shots"]) c.mitigation.shots = scalar<std::int64_t>(x["shots"], mi + "shots");
    if (x["calibration_shots"]) {
      c.mitigation.calibration_shots = scalar<std::int64_t>(x["calibration_shots"], mi + "calibration_shots");
    }
    if (x["bootstrap"]) c.mitigation.bootstrap = scalar<int>(x["bootstrap"], mi + "bootstrap");
    if (x["simulator"]) c.mitigation.simulator = choice(x["simulator"], mi + "simulator", kSimulators);
    if (x["trajectories"]) c.mitigation.trajectories = scalar<int>(x["trajectories"], mi + "trajectories");
  }
  if (const auto x = root["optimizer"]) {
    if (x["method"]) c.optimizer.method = choice(x["method"], o + "method", kMethods);
    if (x["max_evaluations"]) c.optimizer.max_evaluations = scalar<int>(x["max_evaluations"], o + "max_evaluations");
    if (x["tol_energy"]) c.optimizer.tol_energy = scalar<double>(x["tol_energy"], o + "tol_energy");
    if (x["restarts"]) c.optimizer.restarts = scalar<int>(x["restarts"], o + "restarts");
  }
  if (const auto x = root["sweep"]) {
    if (x["n_values"]) c.sweep.n_values = sequence<int>(x["n_values"], s + "n_values");
    if (x["deltas"]) c.sweep.deltas = sequence<double>(x["deltas"], s + "deltas");
    if (x["s_points"]) c.sweep.s_points = scalar<int>(x["s_points"], s + "s_points");
    if (x["max_layers"]) c.sweep.max_layers = scalar<int>(x["max_layers"], s + "max_layers");
  }
  check_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string resolved_config_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(12);
  e << YAML::BeginMap;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_sites" << YAML::Value << c.model.n_sites;
  e << YAML::Key << "delta" << YAML::Value << c.model.delta;
  e << YAML::Key << "geometry" << YAML::Value << name_of(c.model.geometry, kGeometries);
  e << YAML::Key << "boundary" << YAML::Value << name_of(c.model.boundary, kBoundaries);
  e << YAML::EndMap;
  e << YAML::Key << "ansatz" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "layers" << YAML::Value << c.ansatz.layers;
  e << YAML::Key << "tying" << YAML::Value << name_of(c.ansatz.tying, kTyings);
  e << YAML::Key << "params" << YAML::Value;
  if (c.ansatz.params) {
    e << YAML::Flow << *c.ansatz.params;
  } else {
    e << "optimize";
  }
  e << YAML::EndMap;
  e << YAML::Key << "backend" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << name_of(c.backend.kind, kBackends);
  e << YAML::Key << "chi" << YAML::Value << c.backend.chi;
  e << YAML::Key << "cutoff" << YAML::Value << c.backend.cutoff;
  e << YAML::Key << "dense_max_sites" << YAML::Value << c.backend.dense_max_sites;
  e << YAML::EndMap;
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "p1" << YAML::Value << c.noise.p1;
  e << YAML::Key << "p2" << YAML::Value << c.noise.p2;
  e << YAML::Key << "readout_flip" << YAML::Value << c.noise.readout_flip;
  e << YAML::EndMap;
  e << YAML::Key << "measurement" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "protocol" << YAML::Value << c.measurement.protocol;
  e << YAML::Key << "shots" << YAML::Value << c.measurement.shots;
  e << YAML::Key << "repetitions" << YAML::Value << c.measurement.repetitions;
  e << YAML::EndMap;
  e << YAML::Key << "mitigation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_list" << YAML::Value << YAML::Flow << c.mitigation.n_list;
  e << YAML::Key << "shots" << YAML::Value << c.mitigation.shots;
  e << YAML::Key << "calibration_shots" << YAML::Value << c.mitigation.calibration_shots;
  e << YAML::Key << "bootstrap" << YAML::Value << c.mitigation.bootstrap;
  e << YAML::Key << "simulator" << YAML::Value << name_of(c.mitigation.simulator, kSimulators);
  e << YAML::Key << "trajectories" << YAML::Value << c.mitigation.trajectories;
  e << YAML::EndMap;
  e << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "method" << YAML::Value << name_of(c.optimizer.method, kMethods);
  e << YAML::Key << "max_evaluations" << YAML::Value << c.optimizer.max_evaluations;
  e << YAML::Key << "tol_energy" << YAML::Value << c.optimizer.tol_energy;
  e << YAML::Key << "restarts" << YAML::Value << c.optimizer.restarts;
  e << YAML::EndMap;
  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_values" << YAML::Value << YAML::Flow << c.sweep.n_values;
  e << YAML::Key << "deltas" << YAML::Value << YAML::Flow << c.sweep.deltas;
  e << YAML::Key << "s_points" << YAML::Value << c.sweep.s_points;
  e << YAML::Key << "max_layers" << YAML::Value << c.sweep.max_layers;
  e << YAML::EndMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out + "\n";
}

struct Prepared {
  AnsatzParams params;
  double energy = 0.0;
  bool optimised = false;
};

bool use_dense(const ExperimentConfig& c, int n_sites) {
  return c.backend.kind == Backend::dense && n_sites <= c.backend.dense_max_sites;
}

Evaluator evaluator_for(const ExperimentConfig& c, const ChainSpec& spec) {
  return use_dense(c, spec.n_sites) ? dense_evaluator(spec) : mps_evaluator(spec, c.mps_options());
}

// Given angles, or the optimum from the default start.
Prepared prepare_params(const ExperimentConfig& c, const ChainSpec& spec, std::uint64_t index, std::ostream* log,
                        int layers = -1) {
  const Tying tying = c.tying_for(spec.delta);
  const int n_layers = layers > 0 ? layers : c.ansatz.layers;
  const Evaluator eval = evaluator_for(c, spec);
  Prepared p;
  if (c.ansatz.params) {
    p.params = AnsatzParams::from_vector(*c.ansatz.params, tying, spec.geometry);
    p.energy = eval(p.params);
    return p;
  }
  ProgressCallback progress;
  if (log) {
    progress = [&](const TrajectoryPoint& t) {
      *log << nlohmann::json{{"N", spec.n_sites}, {"delta", spec.delta}, {"iteration", t.iteration},
                             {"evaluations", t.evaluations}, {"energy", t.energy}}
                  .dump()
           << "\n";
    };
  }
  // Warm start layer by layer.
  AnsatzParams init = default_init(spec, 1, tying);
  OptimizationRecord rec;
  for (int l = 1; l <= n_layers; ++l) {
    if (l > 1) init = pad_layer(rec.best);
    rec = minimize_energy(eval, spec, init, c.optimizer_config(index), progress);
  }
  p.params = rec.best;
  p.energy = rec.best_energy;
  p.optimised = true;
  return p;
}

struct GroundState {
  double energy = 0.0;
  std::optional<DenseState> dense;
  std::optional<RealMps> mps;
};

GroundState ground_state(const ExperimentConfig& c, const ChainSpec& spec) {
  GroundState g;
  if (use_dense(c, spec.n_sites)) {
    const SpectrumResult s = exact_ground_state(spec);
    g.energy = s.ground_energy();
    g.dense = DenseState::from_real(spec.n_sites, *s.ground_vector);
  } else {
    ItebdResult r = itebd_ground_state(spec, c.mps_options());
    g.energy = r.energy;
    g.mps = std::move(r.state);
  }
  return g;
}

double ansatz_fidelity(const ExperimentConfig& c, const ChainSpec& spec, const AnsatzParams& p, const GroundState& g) {
  if (g.dense) return fidelity(prepare_ansatz_state(spec, p), *g.dense);
  return mps_overlap(mps_ansatz_state(spec, p, c.mps_options()), *g.mps);
}

RzneOptions rzne_options(const ExperimentConfig& c, std::uint64_t index) {
  RzneOptions o;
  o.backend = c.mitigation.simulator;
  o.density = MpsOptions{std::max(c.backend.chi, 128), c.backend.cutoff};
  o.n_list = c.mitigation.n_list;
  o.shots = c.mitigation.shots;
  o.trajectories = c.mitigation.trajectories;
  o.calibration_shots = c.mitigation.calibration_shots;
  o.bootstrap_resamples = c.mitigation.bootstrap;
  o.seed = derive_seed(c.seed, "rzne", index);
  return o;
}

std::vector<double> deltas_or(const ExperimentConfig& c, std::vector<double> fallback) {
  return c.sweep.deltas.empty() ? fallback : c.sweep.deltas;
}

CommandOutput cmd_table1(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  std::string csv = "N,theta_even,theta_odd,E_ansatz,E_gs,eps,fidelity\n";
  ExperimentConfig one = c;
  one.ansatz.layers = 1;
  one.ansatz.tying = TyingChoice::heisenberg;
  std::uint64_t index = 0;
  for (int n : c.sweep.n_values) {
    const ChainSpec spec{n, c.model.delta, Boundary::open, Geometry::chain};
    try {
      spec.validate();
      const Prepared p = prepare_params(one, spec, index++, log);
      const GroundState g = ground_state(one, spec);
      const double eps = std::abs(p.energy - g.energy) / std::abs(g.energy);
      const auto& layer = p.params.layers.front();
      csv += join({std::to_string(n), num(layer.even.x), num(layer.odd.x), num(p.energy), num(g.energy), num(eps),
                   num(ansatz_fidelity(one, spec, p.params, g))});
    } catch (const DomainError& e) {
      csv += join({std::to_string(n), "nan", "nan", "nan", "nan", "nan", "nan"});
      out.warnings.push_back("N=" + std::to_string(n) + ": " + e.what());
    }
  }
  out.files.emplace_back("table1.csv", csv);
  return out;
}

CommandOutput cmd_rzne(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  const ChainSpec spec = c.chain_spec();
  const Prepared p = prepare_params(c, spec, 0, log);
  const RzneRun run = run_rzne(spec, p.params, c.noise_model(spec.n_sites), rzne_options(c, 0));
  if (!run.error.empty()) out.warnings.push_back(run.error);
  std::string csv = "series,m,energy,stderr\n";
  for (const auto& [name, series] : {std::pair{"ansatz", &run.ansatz}, std::pair{"reference", &run.reference}}) {
    for (const auto& pt : series->points) csv += join({name, std::to_string(pt.m), num(pt.energy), num(pt.stderr)});
  }
  out.files.emplace_back("rzne.json", to_json(run));
  out.files.emplace_back("rzne_points.csv", csv);
  return out;
}

CommandOutput cmd_gap_scan(const ExperimentConfig& c, std::ostream*) {
  CommandOutput out;
  std::vector<double> grid;
  for (int i = 0; i < c.sweep.s_points; ++i) grid.push_back(static_cast<double>(i) / (c.sweep.s_points - 1));
  std::string csv = "delta,s,ground_energy,gap\n";
  for (double delta : deltas_or(c, {1.0, -0.8})) {
    ChainSpec spec = c.chain_spec();
    spec.delta = delta;
    for (const auto& g : gap_scan(spec, grid)) csv += join({num(delta), num(g.s), num(g.ground_energy), num(g.gap)});
  }
  out.files.emplace_back("gap_scan.csv", csv);
  return out;
}

std::vector<double> default_delta_grid() {
  std::vector<double> d;
  for (int i = 0; i <= 11; ++i) d.push_back(std::round((-0.8 + 0.2 * i) * 1e10) / 1e10);
  return d;
}

CommandOutput cmd_xxz_sweep(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  std::string csv = "delta,E_ansatz,E_gs,E_measured,E_stderr\n";
  const bool noisy = c.noise.p1 > 0.0 || c.noise.p2 > 0.0;
  std::uint64_t index = 0;
  for (double delta : deltas_or(c, default_delta_grid())) {
    ChainSpec spec = c.chain_spec();
    spec.delta = delta;
    const std::uint64_t k = index++;
    const Prepared p = prepare_params(c, spec, k, log);
    const GroundState g = ground_state(c, spec);
    EnergyEstimate measured;
    if (noisy) {
      const RzneRun run = run_rzne(spec, p.params, c.noise_model(spec.n_sites), rzne_options(c, k));
      if (run.result) {
        measured = {run.result->e_exp, run.result->sigma};
      } else {
        measured = {std::nan(""), std::nan("")};
        out.warnings.push_back("delta=" + num(delta) + ": " + run.error);
      }
    } else {
      const ShotSource src =
          use_dense(c, spec.n_sites)
              ? dense_source(prepare_ansatz_state(spec, p.params), c.noise_model(spec.n_sites),
                             derive_seed(c.seed, "xxz-sweep", k))
              : mps_source(mps_ansatz_state(spec, p.params, c.mps_options()), c.noise_model(spec.n_sites),
                           derive_seed(c.seed, "xxz-sweep", k));
      measured = energy_bell(src, spec, c.measurement.shots).estimate;
    }
    csv += join({num(delta), num(p.energy), num(g.energy), num(measured.energy), num(measured.stderr)});
  }
  out.files.emplace_back("xxz_sweep.csv", csv);
  return out;
}

CommandOutput cmd_ladder(const ExperimentConfig& c, std::ostream*) {
  CommandOutput out;
  std::string csv = "delta,layers,E_ansatz,E_gs,eps,fidelity\n";
  std::uint64_t index = 0;
  for (double delta : deltas_or(c, {0.0, 0.5, 1.0})) {
    ChainSpec spec = c.chain_spec();
    spec.geometry = Geometry::two_leg_ladder;
    spec.delta = delta;
    LayerSweepOptions o;
    o.backend = use_dense(c, spec.n_sites) ? Backend::dense : Backend::mps;
    o.mps = c.mps_options();
    o.tying = c.tying_for(delta);
    o.optimizer = c.optimizer_config(index++);
    for (const auto& row : layer_sweep(spec, c.sweep.max_layers, o)) {
      csv += join({num(delta), std::to_string(row.layers), num(row.energy), num(row.gs_energy), num(row.eps),
                   num(row.fidelity)});
    }
  }
  out.files.emplace_back("ladder.csv", csv);
  return out;
}

CommandOutput cmd_thermo(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  std::string csv = "N,E_ansatz,E_estimate,E_stderr\n";
  const bool noisy = c.noise.p1 > 0.0 || c.noise.p2 > 0.0;
  std::vector<std::pair<int, double>> points;
  std::vector<double> errors;
  std::uint64_t index = 0;
  ExperimentConfig one = c;
  one.ansatz.params.reset();
  for (int n : c.sweep.n_values) {
    const ChainSpec spec{n, c.model.delta, Boundary::open, Geometry::chain};
    const std::uint64_t k = index++;
    const Prepared p = prepare_params(one, spec, k, log);
    EnergyEstimate e{p.energy, 0.0};
    if (noisy) {
      const RzneRun run = run_rzne(spec, p.params, c.noise_model(n), rzne_options(c, k));
      if (!run.result) {
        out.warnings.push_back("N=" + std::to_string(n) + ": " + run.error + " (point left out of the fit)");
        csv += join({std::to_string(n), num(p.energy), "nan", "nan"});
        continue;
      }
      e = {run.result->e_exp, run.result->sigma};
    }
    csv += join({std::to_string(n), num(p.energy), num(e.energy), num(e.stderr)});
    points.emplace_back(n, e.energy);
    errors.push_back(e.stderr);
  }
  const bool weighted = noisy && std::all_of(errors.begin(), errors.end(), [](double s) { return s > 0.0; });
  const ThermoFit fit = thermo_fit(points, weighted ? errors : std::vector<double>{});
  nlohmann::json j{{"e_inf", fit.e_inf},
                   {"slope", fit.slope},
                   {"e_inf_stderr", fit.e_inf_stderr},
                   {"slope_stderr", fit.slope_stderr},
                   {"residuals", fit.residuals},
                   {"bethe_energy_density", bethe_energy_density()},
                   {"relative_deviation", std::abs(fit.e_inf - bethe_energy_density()) / std::abs(bethe_energy_density())}};
  out.files.emplace_back("thermo.csv", csv);
  out.files.emplace_back("thermo_fit.json", j.dump(2) + "\n");
  return out;
}

CommandOutput cmd_optimize(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  const ChainSpec spec = c.chain_spec();
  const Tying tying = c.tying_for(spec.delta);
  const AnsatzParams init = c.ansatz.params ? AnsatzParams::from_vector(*c.ansatz.params, tying, spec.geometry)
                                            : default_init(spec, c.ansatz.layers, tying);
  ProgressCallback progress;
  if (log) {
    progress = [&](const TrajectoryPoint& t) {
      *log << nlohmann::json{{"iteration", t.iteration}, {"evaluations", t.evaluations}, {"energy", t.energy}}.dump()
           << "\n";
    };
  }
  const OptimizationRecord rec = minimize_energy(evaluator_for(c, spec), spec, init, c.optimizer_config(), progress);
  if (rec.hit_evaluation_cap) out.warnings.push_back("optimizer stopped at the evaluation cap");
  out.files.emplace_back("optimize.jsonl", rec.to_jsonl());
  return out;
}

CommandOutput cmd_measure(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  const ChainSpec spec = c.chain_spec();
  const Prepared p = prepare_params(c, spec, 0, log);
  const NoiseModel noise = c.noise_model(spec.n_sites);
  nlohmann::json j;
  j["params"] = nlohmann::json::parse(params_to_json(p.params));
  j["E_ansatz"] = p.energy;
  const bool dense = use_dense(c, spec.n_sites);
  const DenseState state = dense ? prepare_ansatz_state(spec, p.params) : DenseState(1);
  const Circuit circuit = build_ansatz(spec, p.params);
  const std::string protocol = c.measurement.protocol;
  for (int rep = 0; rep < c.measurement.repetitions; ++rep) {
    const std::uint64_t seed = derive_seed(c.seed, "measure", static_cast<std::uint64_t>(rep));
    ShotSource src;
    if (noise.has_gate_noise()) {
      src = trajectory_source(fold(circuit, 0), noise, seed, c.mitigation.trajectories);
    } else if (dense) {
      src = dense_source(state, noise, seed);
    } else {
      src = mps_source(mps_ansatz_state(spec, p.params, c.mps_options()), noise, seed);
    }
    nlohmann::json r;
    if (protocol == "bell" || protocol == "all") {
      const BellMeasurement bm = energy_bell(src, spec, c.measurement.shots);
      r["bell"] = {{"energy", bm.estimate.energy}, {"stderr", bm.estimate.stderr}};
    }
    if (protocol == "xyz" || protocol == "all") {
      const EnergyEstimate e = energy_xyz(src, spec, c.measurement.shots);
      r["xyz"] = {{"energy", e.energy}, {"stderr", e.stderr}};
    }
    if (protocol == "tomography" || protocol == "all") {
      const TomographyResult t = pairwise_tomography(src, spec, c.measurement.shots);
      r["tomography"] = nlohmann::json::parse(to_json(t));
      nlohmann::json conc = nlohmann::json::array();
      for (const auto& pr : t.pairs) {
        conc.push_back({{"sites", {pr.site_a, pr.site_b}}, {"concurrence", concurrence(pr.projected)}});
      }
      r["concurrence"] = conc;
      for (const auto& w : t.warnings) out.warnings.push_back(w);
    }
    j["repetitions"].push_back(r);
  }
  out.files.emplace_back("measure.json", j.dump(2) + "\n");
  return out;
}

CommandOutput cmd_circuit(const ExperimentConfig& c, std::ostream* log) {
  CommandOutput out;
  const ChainSpec spec = c.chain_spec();
  const Prepared p = prepare_params(c, spec, 0, log);
  std::ostringstream os;
  write_circuit(os, build_ansatz(spec, p.params));
  out.files.emplace_back("circuit.txt", os.str());
  return out;
}

using Command = CommandOutput (*)(const ExperimentConfig&, std::ostream*);

const std::vector<std::pair<std::string, std::pair<Command, std::string>>>& commands() {
  static const std::vector<std::pair<std::string, std::pair<Command, std::string>>> table = {
      {"table1", {cmd_table1, "one-layer optimum per N in sweep.n_values -> table1.csv "
                              "(N,theta_even,theta_odd,E_ansatz,E_gs,eps,fidelity)"}},
      {"rzne", {cmd_rzne, "ZNE series of ansatz and Bell reference, fits and rescaling -> rzne.json, "
                          "rzne_points.csv (series,m,energy,stderr)"}},
      {"gap-scan", {cmd_gap_scan, "gap of (1-s) H_odd + s H along sweep.s_points -> gap_scan.csv "
                                  "(delta,s,ground_energy,gap)"}},
      {"xxz-sweep", {cmd_xxz_sweep, "optimum and measured energy per delta -> xxz_sweep.csv "
                                    "(delta,E_ansatz,E_gs,E_measured,E_stderr)"}},
      {"ladder", {cmd_ladder, "layer sweep on the two-leg ladder -> ladder.csv "
                              "(delta,layers,E_ansatz,E_gs,eps,fidelity)"}},
      {"thermo", {cmd_thermo, "energy per N and the 1/N extrapolation -> thermo.csv "
                              "(N,E_ansatz,E_estimate,E_stderr), thermo_fit.json"}},
      {"optimize", {cmd_optimize, "variational optimisation -> optimize.jsonl (trajectory, then final record)"}},
      {"measure", {cmd_measure, "sampled energies by protocol -> measure.json"}},
      {"circuit", {cmd_circuit, "native-gate ansatz circuit -> circuit.txt"}},
  };
  return table;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> names;
  for (const auto& c : commands()) names.push_back(c.first);
  return names;
}

std::string command_help(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.first == name) return c.second.second;
  }
  throw ArgumentError("unknown command " + name);
}

CommandOutput run_command(const std::string& name, const ExperimentConfig& config, std::ostream* log) {
  for (const auto& c : commands()) {
    if (c.first != name) continue;
    CommandOutput out = c.second.first(config, log);
    out.files.insert(out.files.begin(), {"config.resolved.yaml", resolved_config_yaml(config)});
    return out;
  }
  throw ArgumentError("unknown command " + name);
}

}  // namespace chainvqe
