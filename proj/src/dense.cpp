#include "chainvqe/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chainvqe {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_size(int n, int max_qubits) {
  if (n < 1) throw ArgumentError("state needs at least one qubit");
  if (n > max_qubits) {
    throw CapabilityError("dense simulation is capped at " + std::to_string(max_qubits) +
                          " qubits, requested " + std::to_string(n));
  }
}

// Pauli index pair for the k-th (1..15) non-identity two-qubit Pauli.
std::pair<int, int> two_qubit_pauli(int k) { return {k / 4, k % 4}; }

void draw_2q_error(DenseState& s, int a, int b, double p2, Rng& rng) {
  if (p2 <= 0.0) return;
  if (uniform01(rng) >= p2) return;
  const int k = 1 + static_cast<int>(uniform01(rng) * 15.0);
  const auto [pa, pb] = two_qubit_pauli(std::min(k, 15));
  s.apply_pauli(a, pa);
  s.apply_pauli(b, pb);
}

void draw_1q_error(DenseState& s, int q, double p1, Rng& rng) {
  if (p1 <= 0.0) return;
  if (uniform01(rng) >= p1) return;
  const int k = 1 + static_cast<int>(uniform01(rng) * 3.0);
  s.apply_pauli(q, std::min(k, 3));
}

}  // namespace

DenseState::DenseState(int n_qubits) : n_qubits_(n_qubits) {
  check_size(n_qubits, 30);
  amps_.assign(std::size_t{1} << n_qubits, Complex{});
  amps_[0] = 1.0;
}

DenseState::DenseState(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  check_size(n_qubits, 30);
  if (amps_.size() != (std::size_t{1} << n_qubits)) {
    throw ArgumentError("amplitude vector length does not match 2^n");
  }
}

DenseState DenseState::from_real(int n_qubits, const Eigen::VectorXd& v) {
  std::vector<Complex> a(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) a[static_cast<std::size_t>(i)] = v[i];
  return DenseState(n_qubits, std::move(a));
}

double DenseState::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

void DenseState::normalize() {
  const double n = norm();
  if (n == 0.0) throw ArgumentError("cannot normalise the zero vector");
  for (auto& a : amps_) a /= n;
}

Complex DenseState::inner(const DenseState& other) const {
  if (other.amps_.size() != amps_.size()) throw ArgumentError("inner: qubit counts differ");
  Complex s{};
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
  return s;
}

void DenseState::apply_1q(const Matrix2c& u, int q) {
  const std::size_t m = std::size_t{1} << q;
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  const std::size_t dim = amps_.size();
  for (std::size_t hi = 0; hi < dim; hi += 2 * m) {
    for (std::size_t i = hi; i < hi + m; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i | m];
      amps_[i] = u00 * a0 + u01 * a1;
      amps_[i | m] = u10 * a0 + u11 * a1;
    }
  }
}

void DenseState::apply_2q(const Matrix4c& u, int a, int b) {
  if (a == b) throw ArgumentError("apply_2q needs two distinct qubits");
  const std::size_t ma = std::size_t{1} << a;
  const std::size_t mb = std::size_t{1} << b;
  const std::size_t dim = amps_.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & (ma | mb)) continue;
    const std::size_t idx[4] = {i, i | mb, i | ma, i | ma | mb};
    Complex in[4];
    for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
    for (int r = 0; r < 4; ++r) {
      amps_[idx[r]] = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
    }
  }
}

void DenseState::apply_cnot(int control, int target) {
  const std::size_t cm = std::size_t{1} << control;
  const std::size_t tm = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }
}

void DenseState::apply_x(int q) {
  const std::size_t m = std::size_t{1} << q;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (!(i & m)) std::swap(amps_[i], amps_[i | m]);
  }
}

void DenseState::apply_rz(int q, double angle) {
  const std::size_t m = std::size_t{1} << q;
  const Complex p0 = std::exp(-kI * (angle / 2));
  const Complex p1 = std::exp(kI * (angle / 2));
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & m) ? p1 : p0;
}

void DenseState::apply_pauli(int q, int index) {
  const std::size_t m = std::size_t{1} << q;
  switch (index) {
    case 0:
      return;
    case 1:
      apply_x(q);
      return;
    case 2:
      // Y = [[0, -i], [i, 0]]
      for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & m) continue;
        const Complex a0 = amps_[i];
        amps_[i] = -kI * amps_[i | m];
        amps_[i | m] = kI * a0;
      }
      return;
    case 3:
      for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & m) amps_[i] = -amps_[i];
      }
      return;
    default:
      throw ArgumentError("pauli index must be 0..3");
  }
}

void DenseState::apply_gate(const NativeGate& g) {
  switch (g.kind) {
    case GateKind::cnot:
      apply_cnot(g.q0, g.q1);
      return;
    case GateKind::x:
      apply_x(g.q0);
      return;
    case GateKind::rz:
      apply_rz(g.q0, g.angle);
      return;
    case GateKind::sx:
      apply_1q(native_matrix_1q(g), g.q0);
      return;
  }
}

void DenseState::apply_inverse(const NativeGate& g) {
  switch (g.kind) {
    case GateKind::rz:
      apply_rz(g.q0, -g.angle);
      return;
    case GateKind::sx:
      apply_1q(native_matrix_1q(g).adjoint(), g.q0);
      return;
    default:
      apply_gate(g);  // self-inverse
  }
}

void DenseState::apply(const Circuit& c) {
  if (c.n_qubits() != n_qubits_) throw ArgumentError("circuit and state qubit counts differ");
  for (const auto& g : c.gates()) apply_gate(g);
}

DenseState run_exact(const Circuit& c, int max_qubits) {
  check_size(c.n_qubits(), max_qubits);
  DenseState s(c.n_qubits());
  s.apply(c);
  return s;
}

DenseState prepare_ansatz_state(const ChainSpec& spec, const AnsatzParams& params, int max_qubits) {
  spec.validate();
  params.validate();
  check_size(spec.n_sites, max_qubits);
  DenseState s = run_exact(singlet_init_circuit(spec.n_sites), max_qubits);
  const BondLayout layout = bond_layout(spec);
  const auto apply_group = [&](const std::vector<BondTerm>& bonds, const BondAngles& a) {
    const Matrix4c u = rxyz_matrix(2 * a.x, 2 * a.y, 2 * a.z);
    for (const auto& b : bonds) s.apply_2q(u, b.site_a, b.site_b);
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
  return s;
}

double pauli_correlation(const DenseState& state, int a, int b, int alpha) {
  const std::size_t ma = std::size_t{1} << a;
  const std::size_t mb = std::size_t{1} << b;
  const auto amps = state.amplitudes();
  double sum = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const bool same = ((i & ma) != 0) == ((i & mb) != 0);
    switch (alpha) {
      case 3:
        sum += (same ? 1.0 : -1.0) * std::norm(amps[i]);
        break;
      case 1:
        sum += (std::conj(amps[i ^ ma ^ mb]) * amps[i]).real();
        break;
      case 2:
        // YY|b_a b_b> = (same ? -1 : +1) |flipped>
        sum += (same ? -1.0 : 1.0) * (std::conj(amps[i ^ ma ^ mb]) * amps[i]).real();
        break;
      default:
        throw ArgumentError("pauli_correlation: alpha must be 1, 2 or 3");
    }
  }
  return sum;
}

double expectation(const DenseState& state, std::span<const BondTerm> bonds) {
  double e = 0.0;
  for (const auto& b : bonds) {
    if (b.coupling.jx != 0.0) e += b.coupling.jx * pauli_correlation(state, b.site_a, b.site_b, 1);
    if (b.coupling.jy != 0.0) e += b.coupling.jy * pauli_correlation(state, b.site_a, b.site_b, 2);
    if (b.coupling.jz != 0.0) e += b.coupling.jz * pauli_correlation(state, b.site_a, b.site_b, 3);
  }
  return e;
}

Matrix4c reduced_density_matrix(const DenseState& state, int a, int b) {
  const std::size_t ma = std::size_t{1} << a;
  const std::size_t mb = std::size_t{1} << b;
  const auto amps = state.amplitudes();
  Matrix4c rho = Matrix4c::Zero();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & (ma | mb)) continue;
    const std::size_t idx[4] = {i, i | mb, i | ma, i | ma | mb};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) rho(r, c) += amps[idx[r]] * std::conj(amps[idx[c]]);
    }
  }
  return rho;
}

double fidelity(const DenseState& a, const DenseState& b) { return std::abs(a.inner(b)); }

NoiseModel NoiseModel::symmetric_readout(int n_qubits, double flip, double p2, double p1) {
  NoiseModel m;
  m.p1 = p1;
  m.p2 = p2;
  m.readout.assign(static_cast<std::size_t>(n_qubits), flip_matrix(flip, flip));
  m.validate();
  return m;
}

Eigen::Matrix2d NoiseModel::flip_matrix(double p_read1_given0, double p_read0_given1) {
  Eigen::Matrix2d m;
  m << 1.0 - p_read1_given0, p_read0_given1, p_read1_given0, 1.0 - p_read0_given1;
  return m;
}

void NoiseModel::validate() const {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p1) || !prob(p2)) throw ArgumentError("gate error probabilities must lie in [0, 1]");
  for (const auto& m : readout) {
    for (int c = 0; c < 2; ++c) {
      if (!prob(m(0, c)) || !prob(m(1, c)) || std::abs(m(0, c) + m(1, c) - 1.0) > 1e-12) {
        throw ArgumentError("readout confusion matrices must be column-stochastic");
      }
    }
  }
}

Eigen::Matrix2d NoiseModel::confusion(int q) const {
  if (readout.empty()) return Eigen::Matrix2d::Identity();
  if (q < 0 || q >= static_cast<int>(readout.size())) {
    throw ArgumentError("no readout confusion for qubit " + std::to_string(q));
  }
  return readout[static_cast<std::size_t>(q)];
}

NoiseModel NoiseModel::restricted_to_pair(int a, int b) const {
  NoiseModel m;
  m.p1 = p1;
  m.p2 = p2;
  if (!readout.empty()) m.readout = {confusion(a), confusion(b)};
  return m;
}

void ShotRecord::merge(const ShotRecord& other) {
  for (const auto& [bits, n] : other.counts) counts[bits] += n;
  shots += other.shots;
}

void apply_noisy(DenseState& state, const Circuit& c, const NoiseModel& noise, Rng& rng) {
  if (c.n_qubits() != state.n_qubits()) throw ArgumentError("circuit and state qubit counts differ");
  for (const auto& g : c.gates()) {
    state.apply_gate(g);
    if (g.kind == GateKind::cnot) {
      draw_2q_error(state, g.q0, g.q1, noise.p2, rng);
    } else {
      draw_1q_error(state, g.q0, noise.p1, rng);
    }
  }
}

DenseState run_trajectory(const Circuit& c, const NoiseModel& noise, std::uint64_t seed,
                          std::uint64_t trajectory_index, int max_qubits) {
  noise.validate();
  check_size(c.n_qubits(), max_qubits);
  DenseState s(c.n_qubits());
  Rng rng = make_rng(seed, "trajectory", trajectory_index);
  apply_noisy(s, c, noise, rng);
  return s;
}

ShotRecord sample(const DenseState& state, const NoiseModel& noise, std::int64_t shots,
                  std::uint64_t seed) {
  if (shots < 0) throw ArgumentError("shot count must be non-negative");
  const int n = state.n_qubits();
  const auto amps = state.amplitudes();
  std::vector<double> cdf(amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    acc += std::norm(amps[i]);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw ArgumentError("cannot sample from a zero state");

  // P(flip | true bit) per qubit.
  std::vector<std::array<double, 2>> flip(static_cast<std::size_t>(n), {0.0, 0.0});
  bool any_flip = false;
  for (int q = 0; q < n && !noise.readout.empty(); ++q) {
    const Eigen::Matrix2d m = noise.confusion(q);
    flip[static_cast<std::size_t>(q)] = {m(1, 0), m(0, 1)};
    any_flip = any_flip || m(1, 0) > 0.0 || m(0, 1) > 0.0;
  }

  Rng rng = make_rng(seed, "sample");
  ShotRecord rec;
  rec.shots = shots;
  rec.seed = seed;
  std::string bits(static_cast<std::size_t>(n), '0');
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    for (int q = 0; q < n; ++q) {
      int bit = static_cast<int>((idx >> q) & 1U);
      if (any_flip && uniform01(rng) < flip[static_cast<std::size_t>(q)][static_cast<std::size_t>(bit)]) {
        bit ^= 1;
      }
      bits[static_cast<std::size_t>(q)] = static_cast<char>('0' + bit);
    }
    ++rec.counts[bits];
  }
  return rec;
}

FoldedTrajectoryRunner::FoldedTrajectoryRunner(FoldedCircuit folded, Circuit tail, NoiseModel noise,
                                               int max_qubits)
    : folded_(std::move(folded)), tail_(std::move(tail)), noise_(std::move(noise)) {
  noise_.validate();
  check_size(folded_.base.n_qubits(), max_qubits);
  if (tail_.n_qubits() != folded_.base.n_qubits()) throw ArgumentError("tail qubit count differs");
  if (noise_.p1 > 0.0) {
    literal_ = folded_.circuit;
    literal_.append(tail_);
    return;
  }
  // Key points: 0 = start, 2k+1 = just before CNOT k, 2k+2 = just after, 2K+1 = end.
  Step pending;
  std::vector<Matrix2c> merged(static_cast<std::size_t>(n_qubits()));
  std::vector<bool> touched(static_cast<std::size_t>(n_qubits()), false);
  const auto flush = [&]() {
    Step s;
    for (int q = 0; q < n_qubits(); ++q) {
      if (touched[static_cast<std::size_t>(q)]) s.one_qubit.emplace_back(q, merged[static_cast<std::size_t>(q)]);
      touched[static_cast<std::size_t>(q)] = false;
    }
    steps_.push_back(std::move(s));
  };
  for (const auto& g : folded_.base.gates()) {
    if (g.kind == GateKind::cnot) {
      flush();
      Step c;
      c.control = g.q0;
      c.target = g.q1;
      steps_.push_back(c);
      cnots_.emplace_back(g.q0, g.q1);
      continue;
    }
    const auto q = static_cast<std::size_t>(g.q0);
    const Matrix2c u = native_matrix_1q(g);
    merged[q] = touched[q] ? Matrix2c(u * merged[q]) : u;
    touched[q] = true;
  }
  flush();
}

void FoldedTrajectoryRunner::move(DenseState& state, int from, int to) const {
  for (int t = from; t < to; ++t) {
    const Step& s = steps_[static_cast<std::size_t>(t)];
    if (s.control >= 0) {
      state.apply_cnot(s.control, s.target);
    } else {
      for (const auto& [q, u] : s.one_qubit) state.apply_1q(u, q);
    }
  }
  for (int t = from - 1; t >= to; --t) {
    const Step& s = steps_[static_cast<std::size_t>(t)];
    if (s.control >= 0) {
      state.apply_cnot(s.control, s.target);
    } else {
      for (const auto& [q, u] : s.one_qubit) state.apply_1q(u.adjoint(), q);
    }
  }
}

DenseState FoldedTrajectoryRunner::run(std::uint64_t seed, std::uint64_t trajectory_index) const {
  DenseState s(n_qubits());
  Rng rng = make_rng(seed, "trajectory", trajectory_index);
  if (!literal_.empty() || noise_.p1 > 0.0) {
    apply_noisy(s, literal_, noise_, rng);
    return s;
  }
  const int n_cnots = static_cast<int>(cnots_.size());
  const int end = static_cast<int>(steps_.size());
  int cursor = 0;
  const auto event = [&](int k, int at) {
    if (noise_.p2 <= 0.0 || uniform01(rng) >= noise_.p2) return;
    const int which = std::min(15, 1 + static_cast<int>(uniform01(rng) * 15.0));
    move(s, cursor, at);
    cursor = at;
    const auto [pa, pb] = two_qubit_pauli(which);
    s.apply_pauli(cnots_[static_cast<std::size_t>(k)].first, pa);
    s.apply_pauli(cnots_[static_cast<std::size_t>(k)].second, pb);
  };
  for (int rep = 0; rep < folded_.m(); ++rep) {
    if (rep % 2 == 0) {
      for (int k = 0; k < n_cnots; ++k) event(k, 2 * k + 2);
    } else {
      for (int k = n_cnots - 1; k >= 0; --k) event(k, 2 * k + 1);
    }
  }
  move(s, cursor, end);
  apply_noisy(s, tail_, noise_, rng);
  return s;
}

}  // namespace chainvqe
