#include "chainvqe/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace chainvqe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw ArgumentError("qubit index " + std::to_string(q) + " out of range");
}

double wrap(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0) r += period;
  // fmod can land exactly on `period` after the correction for tiny negatives.
  if (r >= period) r -= period;
  return r;
}

// Applies a one-qubit matrix to every column of `m` (columns are states).
void apply_1q_columns(Eigen::MatrixXcd& m, const Matrix2c& u, int q) {
  const Eigen::Index dim = m.rows();
  const Eigen::Index mask = Eigen::Index{1} << q;
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & mask) continue;
      const Complex a0 = m(i, col);
      const Complex a1 = m(i | mask, col);
      m(i, col) = u(0, 0) * a0 + u(0, 1) * a1;
      m(i | mask, col) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

void apply_cnot_columns(Eigen::MatrixXcd& m, int control, int target) {
  const Eigen::Index cm = Eigen::Index{1} << control;
  const Eigen::Index tm = Eigen::Index{1} << target;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if ((i & cm) && !(i & tm)) m.row(i).swap(m.row(i | tm));
  }
}

}  // namespace

Matrix2c native_matrix_1q(const NativeGate& g) {
  Matrix2c u;
  switch (g.kind) {
    case GateKind::rz:
      u << std::exp(-kI * (g.angle / 2)), 0, 0, std::exp(kI * (g.angle / 2));
      return u;
    case GateKind::sx:
      u << Complex(0.5, 0.5), Complex(0.5, -0.5), Complex(0.5, -0.5), Complex(0.5, 0.5);
      return u;
    case GateKind::x:
      return pauli(1);
    case GateKind::cnot:
      break;
  }
  throw ArgumentError("native_matrix_1q: CNOT is a two-qubit gate");
}

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw ArgumentError("circuit needs at least one qubit");
}

Circuit& Circuit::push(const NativeGate& g) {
  check_qubit(g.q0, n_qubits_);
  if (g.kind == GateKind::cnot) {
    check_qubit(g.q1, n_qubits_);
    if (g.q0 == g.q1) throw ArgumentError("CNOT control and target must differ");
  } else if (g.kind == GateKind::rz && !std::isfinite(g.angle)) {
    throw ArgumentError("RZ angle must be finite");
  }
  gates_.push_back(g);
  return *this;
}

Circuit& Circuit::h(int q) {
  rz(q, kPi / 2);
  sx(q);
  return rz(q, kPi / 2);
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits_ > n_qubits_) throw ArgumentError("appended circuit has more qubits");
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

int Circuit::cnot_count() const {
  return static_cast<int>(std::count_if(gates_.begin(), gates_.end(),
                                        [](const NativeGate& g) { return g.is_two_qubit(); }));
}

int Circuit::cnot_depth() const {
  std::vector<int> layer(static_cast<std::size_t>(n_qubits_), 0);
  int depth = 0;
  for (const auto& g : gates_) {
    if (!g.is_two_qubit()) continue;
    auto& lc = layer[static_cast<std::size_t>(g.q0)];
    auto& lt = layer[static_cast<std::size_t>(g.q1)];
    lc = lt = std::max(lc, lt) + 1;
    depth = std::max(depth, lc);
  }
  return depth;
}

Eigen::MatrixXcd Circuit::unitary() const {
  if (n_qubits_ > 12) throw CapabilityError("Circuit::unitary is limited to 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits_;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& g : gates_) {
    if (g.is_two_qubit()) {
      apply_cnot_columns(u, g.q0, g.q1);
    } else {
      apply_1q_columns(u, native_matrix_1q(g), g.q0);
    }
  }
  return u;
}

Matrix4c rxyz_matrix(double theta_x, double theta_y, double theta_z) {
  // XX, YY, ZZ commute; {|00>,|11>} and {|01>,|10>} are invariant blocks.
  const double a = theta_x / 2, b = theta_y / 2, c = theta_z / 2;
  Matrix4c u = Matrix4c::Zero();
  const Complex e_minus = std::exp(-kI * c);
  const Complex e_plus = std::exp(kI * c);
  u(0, 0) = u(3, 3) = e_minus * std::cos(a - b);
  u(0, 3) = u(3, 0) = -kI * e_minus * std::sin(a - b);
  u(1, 1) = u(2, 2) = e_plus * std::cos(a + b);
  u(1, 2) = u(2, 1) = -kI * e_plus * std::sin(a + b);
  return u;
}

void append_rxyz(Circuit& c, int a, int b, double theta_x, double theta_y, double theta_z) {
  c.cnot(b, a);
  c.rz(a, theta_z);
  c.h(b);
  c.rz(b, theta_x + kPi / 2);
  c.cnot(b, a);
  c.rz(a, -theta_y);
  c.h(b);
  c.cnot(b, a);
  // Rx(pi/2) ~ SX on a, Rx(-pi/2) ~ X SX on b.
  c.sx(a);
  c.sx(b);
  c.x(b);
}

Circuit rxyz_native(double theta_x, double theta_y, double theta_z) {
  Circuit c(2);
  append_rxyz(c, 0, 1, theta_x, theta_y, theta_z);
  return c;
}

Circuit singlet_init_circuit(int n_sites) {
  if (n_sites < 2 || n_sites % 2 != 0) {
    throw GeometryError("singlet initialisation needs an even number of sites");
  }
  Circuit c(n_sites);
  for (int a = 0; a < n_sites; a += 2) {
    c.x(a);
    c.x(a + 1);
    c.h(a);
    c.cnot(a, a + 1);
  }
  return c;
}

AnsatzParams AnsatzParams::heisenberg(std::span<const std::pair<double, double>> even_odd) {
  AnsatzParams p;
  p.tying = Tying::heisenberg;
  for (const auto& [even, odd] : even_odd) {
    p.layers.push_back({BondAngles::isotropic(odd), BondAngles::isotropic(even), BondAngles{}});
  }
  return p;
}

AnsatzParams AnsatzParams::zeros(int n_layers, Tying tying) {
  AnsatzParams p;
  p.tying = tying;
  p.layers.assign(static_cast<std::size_t>(std::max(n_layers, 0)), LayerAngles{});
  return p;
}

int AnsatzParams::params_per_group(Tying tying) {
  switch (tying) {
    case Tying::heisenberg: return 1;
    case Tying::xxz: return 2;
    case Tying::free: return 3;
  }
  return 3;
}

int AnsatzParams::n_parameters(Geometry geometry) const {
  return n_layers() * groups_per_layer(geometry) * params_per_group(tying);
}

namespace {

void push_group(std::vector<double>& v, const BondAngles& a, Tying tying) {
  switch (tying) {
    case Tying::heisenberg: v.push_back(a.x); break;
    case Tying::xxz: v.push_back(a.x); v.push_back(a.z); break;
    case Tying::free: v.push_back(a.x); v.push_back(a.y); v.push_back(a.z); break;
  }
}

BondAngles read_group(std::span<const double> v, std::size_t& pos, Tying tying) {
  switch (tying) {
    case Tying::heisenberg: {
      const double t = v[pos++];
      return BondAngles::isotropic(t);
    }
    case Tying::xxz: {
      const double xy = v[pos++];
      const double z = v[pos++];
      return {xy, xy, z};
    }
    case Tying::free: {
      BondAngles a{v[pos], v[pos + 1], v[pos + 2]};
      pos += 3;
      return a;
    }
  }
  return {};
}

}  // namespace

std::vector<double> AnsatzParams::to_vector(Geometry geometry) const {
  std::vector<double> v;
  for (const auto& layer : layers) {
    push_group(v, layer.even, tying);
    push_group(v, layer.odd, tying);
    if (geometry == Geometry::two_leg_ladder) push_group(v, layer.rung, tying);
  }
  return v;
}

AnsatzParams AnsatzParams::from_vector(std::span<const double> v, Tying tying, Geometry geometry) {
  const std::size_t per_layer =
      static_cast<std::size_t>(groups_per_layer(geometry) * params_per_group(tying));
  if (v.empty() || v.size() % per_layer != 0) {
    throw ArgumentError("parameter vector length does not match the tying and geometry");
  }
  AnsatzParams p;
  p.tying = tying;
  std::size_t pos = 0;
  while (pos < v.size()) {
    LayerAngles layer;
    layer.even = read_group(v, pos, tying);
    layer.odd = read_group(v, pos, tying);
    if (geometry == Geometry::two_leg_ladder) layer.rung = read_group(v, pos, tying);
    p.layers.push_back(layer);
  }
  return p;
}

void AnsatzParams::validate() const {
  if (layers.empty()) throw ArgumentError("ansatz needs at least one layer");
  for (const auto& layer : layers) {
    for (const BondAngles& a : {layer.odd, layer.even, layer.rung}) {
      if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z)) {
        throw ArgumentError("ansatz angles must be finite");
      }
      if (tying == Tying::heisenberg && !(a.x == a.y && a.y == a.z)) {
        throw ArgumentError("heisenberg tying requires x = y = z on every bond group");
      }
      if (tying == Tying::xxz && a.x != a.y) {
        throw ArgumentError("xxz tying requires x = y on every bond group");
      }
    }
  }
}

AnsatzParams AnsatzParams::canonical() const {
  AnsatzParams out = *this;
  const double period = tying == Tying::heisenberg ? kPi / 2 : kPi;
  for (auto& layer : out.layers) {
    for (BondAngles* a : {&layer.odd, &layer.even, &layer.rung}) {
      a->x = wrap(a->x, period);
      a->y = wrap(a->y, period);
      a->z = wrap(a->z, period);
    }
  }
  return out;
}

Circuit build_ansatz(const ChainSpec& spec, const AnsatzParams& params) {
  params.validate();
  const BondLayout layout = bond_layout(spec);
  Circuit c = singlet_init_circuit(spec.n_sites);
  const auto apply_group = [&](const std::vector<BondTerm>& bonds, const BondAngles& a) {
    for (const auto& b : bonds) append_rxyz(c, b.site_a, b.site_b, 2 * a.x, 2 * a.y, 2 * a.z);
  };
  for (const auto& layer : params.layers) {
    if (spec.geometry == Geometry::chain) {
      apply_group(layout.even, layer.even);
      apply_group(layout.odd, layer.odd);
    } else {
      apply_group(layout.odd, layer.odd);
      apply_group(layout.even, layer.even);
      apply_group(layout.rungs, layer.rung);
    }
  }
  return c;
}

Circuit invert(const Circuit& c) {
  Circuit out(c.n_qubits());
  const auto gates = c.gates();
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    switch (it->kind) {
      case GateKind::rz: out.rz(it->q0, -it->angle); break;
      case GateKind::sx:
        out.sx(it->q0);
        out.x(it->q0);
        break;
      case GateKind::x: out.x(it->q0); break;
      case GateKind::cnot: out.cnot(it->q0, it->q1); break;
    }
  }
  return out;
}

FoldedCircuit fold(const Circuit& c, int n_folds) {
  if (n_folds < 0) throw ArgumentError("n_folds must be non-negative");
  FoldedCircuit f{c, n_folds, c};
  if (n_folds > 0) {
    const Circuit inv = invert(c);
    for (int k = 0; k < n_folds; ++k) {
      f.circuit.append(inv);
      f.circuit.append(c);
    }
  }
  return f;
}

std::string MeasurementSetting::name() const {
  const auto basis_char = [](PauliBasis b) {
    switch (b) {
      case PauliBasis::x: return 'x';
      case PauliBasis::y: return 'y';
      case PauliBasis::z: return 'z';
    }
    return 'z';
  };
  const std::string parity_name = parity == BondParity::odd ? "odd" : "even";
  switch (kind) {
    case Kind::bell: return "bell_" + parity_name;
    case Kind::pauli: return std::string(1, basis_char(basis_a)) + "_basis";
    case Kind::tomography:
      return "tomo_" + parity_name + "_" + basis_char(basis_a) + basis_char(basis_b);
  }
  return "unknown";
}

std::vector<std::pair<int, int>> parity_pairs(const ChainSpec& spec, BondParity parity) {
  if (spec.geometry != Geometry::chain) {
    throw GeometryError("pairwise measurement settings are defined for chains only");
  }
  const BondLayout layout = bond_layout(spec);
  const auto& group = parity == BondParity::odd ? layout.odd : layout.even;
  std::vector<std::pair<int, int>> pairs;
  std::vector<char> used(static_cast<std::size_t>(spec.n_sites), 0);
  for (const auto& b : group) {
    auto& ua = used[static_cast<std::size_t>(b.site_a)];
    auto& ub = used[static_cast<std::size_t>(b.site_b)];
    if (ua || ub) throw GeometryError("bond pairs of one parity overlap; cannot measure in parallel");
    ua = ub = 1;
    pairs.emplace_back(b.site_a, b.site_b);
  }
  return pairs;
}

namespace {

void rotate_to_z(Circuit& c, int q, PauliBasis basis) {
  switch (basis) {
    case PauliBasis::x: c.h(q); break;
    case PauliBasis::y:
      // H S^dagger = RZ(pi/2) SX up to phase.
      c.sx(q);
      c.rz(q, kPi / 2);
      break;
    case PauliBasis::z: break;
  }
}

}  // namespace

Circuit append_measurement_basis(const Circuit& c, const ChainSpec& spec,
                                 const MeasurementSetting& setting) {
  if (c.n_qubits() != spec.n_sites) throw ArgumentError("circuit width does not match the model");
  Circuit out = c;
  switch (setting.kind) {
    case MeasurementSetting::Kind::pauli:
      for (int q = 0; q < spec.n_sites; ++q) rotate_to_z(out, q, setting.basis_a);
      break;
    case MeasurementSetting::Kind::bell:
      for (const auto& [first, second] : parity_pairs(spec, setting.parity)) {
        out.cnot(first, second);
        out.h(first);
      }
      break;
    case MeasurementSetting::Kind::tomography:
      for (const auto& [first, second] : parity_pairs(spec, setting.parity)) {
        rotate_to_z(out, first, setting.basis_a);
        rotate_to_z(out, second, setting.basis_b);
      }
      break;
  }
  return out;
}

void write_circuit(std::ostream& os, const Circuit& c) {
  os << "# qubits " << c.n_qubits() << '\n';
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::rz: os << "RZ " << g.q0 << ' ' << g.angle << '\n'; break;
      case GateKind::sx: os << "SX " << g.q0 << '\n'; break;
      case GateKind::x: os << "X " << g.q0 << '\n'; break;
      case GateKind::cnot: os << "CNOT " << g.q0 << ' ' << g.q1 << '\n'; break;
    }
  }
  os.precision(old_precision);
}

Circuit read_circuit(std::istream& is) {
  std::vector<NativeGate> gates;
  int declared = 0;
  int max_qubit = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op)) continue;
    if (op[0] == '#') {
      std::string key;
      if (ls >> key && key == "qubits") ls >> declared;
      continue;
    }
    NativeGate g;
    bool ok = false;
    if (op == "RZ") {
      g.kind = GateKind::rz;
      ok = static_cast<bool>(ls >> g.q0 >> g.angle);
    } else if (op == "SX" || op == "X") {
      g.kind = op == "SX" ? GateKind::sx : GateKind::x;
      ok = static_cast<bool>(ls >> g.q0);
    } else if (op == "CNOT") {
      g.kind = GateKind::cnot;
      ok = static_cast<bool>(ls >> g.q0 >> g.q1);
    }
    if (!ok) throw ArgumentError("circuit text: cannot parse line " + std::to_string(line_no));
    max_qubit = std::max({max_qubit, g.q0, g.q1});
    gates.push_back(g);
  }
  Circuit c(std::max(declared, max_qubit + 1));
  for (const auto& g : gates) c.push(g);
  return c;
}

}  // namespace chainvqe
