#include "chainvqe/density.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "thin_svd.hpp"

namespace chainvqe {

namespace {

Matrix4c kron2(const Matrix2c& first, const Matrix2c& second) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = first(i, j) * second;
  }
  return out;
}

Matrix4c swap_basis(const Matrix4c& m) {
  Matrix4c s = Matrix4c::Zero();
  s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
  return s * m * s;
}

// CNOT in the basis 2 q_a + q_b of a block on (a, b).
Matrix4c block_cnot(bool control_is_a) {
  Matrix4c m = Matrix4c::Identity();
  if (control_is_a) {
    m.row(2).swap(m.row(3));
  } else {
    m.row(1).swap(m.row(3));
  }
  return m;
}

double pair_survival(double p2) { return 1.0 - 16.0 * p2 / 15.0; }
double single_survival(double p1) { return 1.0 - 4.0 * p1 / 3.0; }

}  // namespace

std::vector<NoisyBlock> compile_noisy_blocks(const Circuit& c, const NoiseModel& noise) {
  noise.validate();
  const int n = c.n_qubits();
  std::vector<NoisyBlock> out;
  std::vector<Matrix2c> pending(static_cast<std::size_t>(n), Matrix2c::Identity());
  std::vector<int> owner(static_cast<std::size_t>(n), -1);  // index into open blocks
  struct Open {
    NoisyBlock block;
    int cnots = 0;
    bool live = false;
  };
  std::vector<Open> open;

  auto flush_qubit_pending = [&](int q) {
    const Matrix2c& m = pending[static_cast<std::size_t>(q)];
    if (!m.isIdentity(0.0)) {
      NoisyBlock b;
      b.a = q;
      b.u.topLeftCorner<2, 2>() = m;
      out.push_back(b);
    }
    pending[static_cast<std::size_t>(q)] = Matrix2c::Identity();
  };
  auto close = [&](int idx) {
    Open& o = open[static_cast<std::size_t>(idx)];
    if (!o.live) return;
    o.block.depolarizing = 1.0 - std::pow(pair_survival(noise.p2), o.cnots);
    out.push_back(o.block);
    owner[static_cast<std::size_t>(o.block.a)] = owner[static_cast<std::size_t>(o.block.b)] = -1;
    o.live = false;
  };

  for (const auto& g : c.gates()) {
    if (g.kind != GateKind::cnot) {
      const Matrix2c m = native_matrix_1q(g);
      const int idx = owner[static_cast<std::size_t>(g.q0)];
      if (noise.p1 > 0.0) {
        if (idx >= 0) close(idx);
        NoisyBlock b;
        b.a = g.q0;
        b.u.topLeftCorner<2, 2>() = m * pending[static_cast<std::size_t>(g.q0)];
        b.depolarizing = 1.0 - single_survival(noise.p1);
        pending[static_cast<std::size_t>(g.q0)] = Matrix2c::Identity();
        out.push_back(b);
      } else if (idx >= 0) {
        NoisyBlock& b = open[static_cast<std::size_t>(idx)].block;
        b.u = (g.q0 == b.a ? kron2(m, Matrix2c::Identity()) : kron2(Matrix2c::Identity(), m)) * b.u;
      } else {
        pending[static_cast<std::size_t>(g.q0)] = m * pending[static_cast<std::size_t>(g.q0)];
      }
      continue;
    }
    const int ic = owner[static_cast<std::size_t>(g.q0)];
    const int it = owner[static_cast<std::size_t>(g.q1)];
    if (ic >= 0 && ic == it) {
      Open& o = open[static_cast<std::size_t>(ic)];
      o.block.u = block_cnot(g.q0 == o.block.a) * o.block.u;
      ++o.cnots;
      continue;
    }
    if (ic >= 0) close(ic);
    if (it >= 0) close(it);
    Open o;
    o.block.a = g.q0;
    o.block.b = g.q1;
    o.block.u = block_cnot(true) * kron2(pending[static_cast<std::size_t>(g.q0)], pending[static_cast<std::size_t>(g.q1)]);
    pending[static_cast<std::size_t>(g.q0)] = pending[static_cast<std::size_t>(g.q1)] = Matrix2c::Identity();
    o.cnots = 1;
    o.live = true;
    open.push_back(o);
    owner[static_cast<std::size_t>(g.q0)] = owner[static_cast<std::size_t>(g.q1)] = static_cast<int>(open.size()) - 1;
  }
  for (std::size_t i = 0; i < open.size(); ++i) close(static_cast<int>(i));
  for (int q = 0; q < n; ++q) flush_qubit_pending(q);
  return out;
}

Eigen::MatrixXcd run_density_matrix(const Circuit& c, const NoiseModel& noise, int max_qubits) {
  const int n = c.n_qubits();
  if (n > max_qubits) {
    throw CapabilityError("dense density matrix limited to " + std::to_string(max_qubits) + " qubits");
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;
  for (const NoisyBlock& b : compile_noisy_blocks(c, noise)) {
    if (!b.is_two_qubit()) {
      const Matrix2c u = b.u.topLeftCorner<2, 2>();
      const Eigen::Index m = Eigen::Index{1} << b.a;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & m) continue;
        for (Eigen::Index j = 0; j < dim; ++j) {
          const Complex x = rho(i, j), y = rho(i | m, j);
          rho(i, j) = u(0, 0) * x + u(0, 1) * y;
          rho(i | m, j) = u(1, 0) * x + u(1, 1) * y;
        }
      }
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j & m) continue;
        for (Eigen::Index i = 0; i < dim; ++i) {
          const Complex x = rho(i, j), y = rho(i, j | m);
          rho(i, j) = x * std::conj(u(0, 0)) + y * std::conj(u(0, 1));
          rho(i, j | m) = x * std::conj(u(1, 0)) + y * std::conj(u(1, 1));
        }
      }
      if (b.depolarizing > 0.0) {
        const double q = b.depolarizing;
        for (Eigen::Index i = 0; i < dim; ++i) {
          if (i & m) continue;
          for (Eigen::Index j = 0; j < dim; ++j) {
            if (j & m) continue;
            const Complex avg = 0.5 * (rho(i, j) + rho(i | m, j | m));
            rho(i, j) = (1 - q) * rho(i, j) + q * avg;
            rho(i | m, j | m) = (1 - q) * rho(i | m, j | m) + q * avg;
            rho(i | m, j) *= (1 - q);
            rho(i, j | m) *= (1 - q);
          }
        }
      }
      continue;
    }
    const Eigen::Index ma = Eigen::Index{1} << b.a, mb = Eigen::Index{1} << b.b;
    const Eigen::Index off[4] = {0, mb, ma, ma | mb};  // index 2 q_a + q_b
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & (ma | mb)) continue;
        Eigen::Vector4cd v;
        for (int k = 0; k < 4; ++k) v[k] = rho(i | off[k], j);
        v = b.u * v;
        for (int k = 0; k < 4; ++k) rho(i | off[k], j) = v[k];
      }
    }
    const Matrix4c uc = b.u.conjugate();
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j & (ma | mb)) continue;
        Eigen::Vector4cd v;
        for (int k = 0; k < 4; ++k) v[k] = rho(i, j | off[k]);
        v = uc * v;
        for (int k = 0; k < 4; ++k) rho(i, j | off[k]) = v[k];
      }
    }
    if (b.depolarizing > 0.0) {
      const double q = b.depolarizing;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & (ma | mb)) continue;
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (j & (ma | mb)) continue;
          Complex tr = 0.0;
          for (int k = 0; k < 4; ++k) tr += rho(i | off[k], j | off[k]);
          for (int r = 0; r < 4; ++r) {
            for (int s = 0; s < 4; ++s) rho(i | off[r], j | off[s]) *= (1 - q);
            rho(i | off[r], j | off[r]) += q * tr / 4.0;
          }
        }
      }
    }
  }
  return rho;
}

DensityMps DensityMps::zero_state(int n_sites, MpsOptions options) {
  if (n_sites < 1) throw ArgumentError("need at least one site");
  DensityMps m;
  m.options_ = options;
  m.sites_.resize(static_cast<std::size_t>(n_sites));
  for (auto& s : m.sites_) {
    for (auto& a : s) a = Matrix::Zero(1, 1);
    s[0](0, 0) = 1.0;
  }
  return m;
}

int DensityMps::max_bond_dimension() const {
  int d = 1;
  for (int k = 0; k + 1 < n_sites(); ++k) d = std::max(d, bond_dimension(k));
  return d;
}

void DensityMps::move_right() {
  Site& a = sites_[static_cast<std::size_t>(center_)];
  Site& next = sites_[static_cast<std::size_t>(center_ + 1)];
  const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
  Matrix m(4 * dl, dr);
  m << a[0], a[1], a[2], a[3];
  Eigen::HouseholderQR<Matrix> qr(m);
  const Eigen::Index k = std::min(4 * dl, dr);
  const Matrix q = qr.householderQ() * Matrix::Identity(4 * dl, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int s = 0; s < 4; ++s) {
    a[static_cast<std::size_t>(s)] = q.middleRows(s * dl, dl);
    next[static_cast<std::size_t>(s)] = r * next[static_cast<std::size_t>(s)];
  }
  ++center_;
}

void DensityMps::move_left() {
  Site& a = sites_[static_cast<std::size_t>(center_)];
  Site& prev = sites_[static_cast<std::size_t>(center_ - 1)];
  const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
  Matrix m(dl, 4 * dr);
  m << a[0], a[1], a[2], a[3];
  Eigen::HouseholderQR<Matrix> qr(m.adjoint());
  const Eigen::Index k = std::min(dl, 4 * dr);
  const Matrix q = qr.householderQ() * Matrix::Identity(4 * dr, k);
  const Matrix rh = Matrix(qr.matrixQR().topRows(k).triangularView<Eigen::Upper>()).adjoint();
  const Matrix qh = q.adjoint();
  for (int s = 0; s < 4; ++s) {
    a[static_cast<std::size_t>(s)] = qh.middleCols(s * dr, dr);
    prev[static_cast<std::size_t>(s)] = prev[static_cast<std::size_t>(s)] * rh;
  }
  --center_;
}

void DensityMps::move_center(int target) {
  while (center_ < target) move_right();
  while (center_ > target) move_left();
}

void DensityMps::apply(const NoisyBlock& block) {
  const int n = n_sites();
  if (block.a < 0 || block.a >= n || block.b >= n) throw ArgumentError("block qubit out of range");
  if (!block.is_two_qubit()) {
    // Superoperator on s = i + 2 j.
    const Matrix2c u = block.u.topLeftCorner<2, 2>();
    Eigen::Matrix4cd sop;
    for (int s1 = 0; s1 < 4; ++s1) {
      for (int s0 = 0; s0 < 4; ++s0) {
        sop(s1, s0) = u(s1 & 1, s0 & 1) * std::conj(u(s1 >> 1, s0 >> 1));
      }
    }
    const double q = block.depolarizing;
    Eigen::Matrix4cd dep = (1 - q) * Eigen::Matrix4cd::Identity();
    for (int s1 : {0, 3}) {
      for (int s0 : {0, 3}) dep(s1, s0) += q / 2.0;
    }
    sop = dep * sop;
    move_center(block.a);
    Site& st = sites_[static_cast<std::size_t>(block.a)];
    const Site old = st;
    for (int s1 = 0; s1 < 4; ++s1) {
      st[static_cast<std::size_t>(s1)] = Matrix::Zero(old[0].rows(), old[0].cols());
      for (int s0 = 0; s0 < 4; ++s0) {
        if (sop(s1, s0) != Complex(0.0)) st[static_cast<std::size_t>(s1)] += sop(s1, s0) * old[static_cast<std::size_t>(s0)];
      }
    }
    return;
  }
  if (std::abs(block.a - block.b) != 1) {
    throw OrderingError("density MPS blocks need neighbouring qubits, got " + std::to_string(block.a) + " and " +
                        std::to_string(block.b));
  }
  const int left = std::min(block.a, block.b);
  const Matrix4c u = block.a == left ? block.u : swap_basis(block.u);
  // Superoperator on k = 4 s_left + s_right, s = i + 2 j.
  Eigen::Matrix<Complex, 16, 16> sop;
  for (int k1 = 0; k1 < 16; ++k1) {
    const int il1 = (k1 >> 2) & 1, jl1 = k1 >> 3, ir1 = k1 & 1, jr1 = (k1 >> 1) & 1;
    for (int k0 = 0; k0 < 16; ++k0) {
      const int il0 = (k0 >> 2) & 1, jl0 = k0 >> 3, ir0 = k0 & 1, jr0 = (k0 >> 1) & 1;
      sop(k1, k0) = u(2 * il1 + ir1, 2 * il0 + ir0) * std::conj(u(2 * jl1 + jr1, 2 * jl0 + jr0));
    }
  }
  if (block.depolarizing > 0.0) {
    const double q = block.depolarizing;
    Eigen::Matrix<Complex, 16, 16> dep = (1 - q) * Eigen::Matrix<Complex, 16, 16>::Identity();
    const int diag[4] = {0, 3, 12, 15};  // i = j on both sites
    for (int k1 : diag) {
      for (int k0 : diag) dep(k1, k0) += q / 4.0;
    }
    sop = dep * sop;
  }

  if (center_ != left && center_ != left + 1) move_center(center_ < left ? left : left + 1);
  if (center_ == left + 1) move_left();
  const Site& A = sites_[static_cast<std::size_t>(left)];
  const Site& B = sites_[static_cast<std::size_t>(left + 1)];
  const Eigen::Index dl = A[0].rows(), dr = B[0].cols();
  Matrix prod[4][4];
  for (int s1 = 0; s1 < 4; ++s1) {
    for (int s2 = 0; s2 < 4; ++s2) prod[s1][s2] = A[static_cast<std::size_t>(s1)] * B[static_cast<std::size_t>(s2)];
  }
  Matrix theta = Matrix::Zero(4 * dl, 4 * dr);
  for (int t1 = 0; t1 < 4; ++t1) {
    for (int t2 = 0; t2 < 4; ++t2) {
      auto blk = theta.block(t1 * dl, t2 * dr, dl, dr);
      for (int s1 = 0; s1 < 4; ++s1) {
        for (int s2 = 0; s2 < 4; ++s2) {
          const Complex c = sop(4 * t1 + t2, 4 * s1 + s2);
          if (std::abs(c) > 0.0) blk += c * prod[s1][s2];
        }
      }
    }
  }
  const auto svd = detail::thin_svd(theta);
  const auto& sv = svd.s;
  const Eigen::Index rank = sv.size();
  const double total = sv.squaredNorm();
  Eigen::Index keep = std::min<Eigen::Index>(rank, options_.chi_max);
  double tail = 0.0;
  for (Eigen::Index k = rank - 1; k >= keep; --k) tail += sv[k] * sv[k];
  while (keep > 1) {
    const double w = sv[keep - 1] * sv[keep - 1];
    if ((tail + w) / total > options_.svd_cutoff) break;
    tail += w;
    --keep;
  }
  log_.record(total > 0.0 ? tail / total : 0.0);
  const Matrix us = svd.u.leftCols(keep) * sv.head(keep).cast<Complex>().asDiagonal();
  const Matrix vh = svd.vh.topRows(keep);
  Site& na = sites_[static_cast<std::size_t>(left)];
  Site& nb = sites_[static_cast<std::size_t>(left + 1)];
  for (int s = 0; s < 4; ++s) {
    na[static_cast<std::size_t>(s)] = us.middleRows(s * dl, dl);
    nb[static_cast<std::size_t>(s)] = vh.middleCols(s * dr, dr);
  }
  center_ = left;
}

void DensityMps::run(const Circuit& c, const NoiseModel& noise) {
  if (c.n_qubits() != n_sites()) throw ArgumentError("circuit and density MPS sizes differ");
  for (const NoisyBlock& b : compile_noisy_blocks(c, noise)) apply(b);
}

Complex DensityMps::trace() const {
  Matrix env = Matrix::Ones(1, 1);
  for (const Site& s : sites_) env = env * (s[0] + s[3]);
  return env(0, 0);
}

Matrix4c DensityMps::pair_density(int a, int b) const {
  if (a == b || a < 0 || b < 0 || a >= n_sites() || b >= n_sites()) throw ArgumentError("invalid qubit pair");
  const int lo = std::min(a, b), hi = std::max(a, b);
  auto traced = [&](int k) { return Matrix(sites_[static_cast<std::size_t>(k)][0] + sites_[static_cast<std::size_t>(k)][3]); };
  Matrix left = Matrix::Ones(1, 1);
  for (int k = 0; k < lo; ++k) left = left * traced(k);
  Matrix mid = Matrix::Identity(bond_dimension(lo), bond_dimension(lo));
  for (int k = lo + 1; k < hi; ++k) mid = mid * traced(k);
  Matrix right = Matrix::Ones(1, 1);
  for (int k = n_sites() - 1; k > hi; --k) right = traced(k) * right;
  Matrix4c rho;
  for (int s1 = 0; s1 < 4; ++s1) {
    const Matrix l1 = left * sites_[static_cast<std::size_t>(lo)][static_cast<std::size_t>(s1)] * mid;
    for (int s2 = 0; s2 < 4; ++s2) {
      const Complex v = (l1 * sites_[static_cast<std::size_t>(hi)][static_cast<std::size_t>(s2)] * right)(0, 0);
      rho(2 * (s1 & 1) + (s2 & 1), 2 * (s1 >> 1) + (s2 >> 1)) = v;
    }
  }
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return a == lo ? rho : swap_basis(rho);
}

std::array<double, 4> bell_readout_distribution(const Matrix4c& rho_pair, std::pair<int, int> pair,
                                                const NoiseModel& noise) {
  Circuit tail(2);
  tail.cnot(0, 1).h(0);
  NoiseModel local = noise.restricted_to_pair(pair.first, pair.second);
  Matrix4c rho = rho_pair;
  for (const NoisyBlock& b : compile_noisy_blocks(tail, local)) {
    Matrix4c u = b.u;
    if (!b.is_two_qubit()) {
      const Matrix2c g = b.u.topLeftCorner<2, 2>();
      u = b.a == 0 ? kron2(g, Matrix2c::Identity()) : kron2(Matrix2c::Identity(), g);
    } else if (b.a == 1) {
      u = swap_basis(u);
    }
    rho = u * rho * u.adjoint();
    const double q = b.depolarizing;
    if (q <= 0.0) continue;
    if (b.is_two_qubit()) {
      rho = (1 - q) * rho + q * rho.trace() * Matrix4c::Identity() / 4.0;
    } else {
      // Trace out the qubit and replace it by I/2.
      Matrix4c mixed = Matrix4c::Zero();
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const int bit = b.a == 0 ? 2 : 1;
          if ((i & bit) != (j & bit)) continue;
          const int other_i = i & ~bit, other_j = j & ~bit;
          mixed(i, j) = 0.5 * (rho(other_i, other_j) + rho(other_i | bit, other_j | bit));
        }
      }
      rho = (1 - q) * rho + q * mixed;
    }
  }
  const Eigen::Matrix2d cf = local.confusion(0), cs = local.confusion(1);
  std::array<double, 4> out{};
  for (int tf = 0; tf < 2; ++tf) {
    for (int ts = 0; ts < 2; ++ts) {
      const double p = std::max(0.0, rho(2 * tf + ts, 2 * tf + ts).real());
      for (int rf = 0; rf < 2; ++rf) {
        for (int rs = 0; rs < 2; ++rs) out[static_cast<std::size_t>(rf + 2 * rs)] += cf(rf, tf) * cs(rs, ts) * p;
      }
    }
  }
  double total = 0.0;
  for (double p : out) total += p;
  for (double& p : out) p /= total;
  return out;
}

BellMeasurement density_bell_measurement(const DensityMps& rho, const ChainSpec& spec, const NoiseModel& noise,
                                         std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw ArgumentError("shots must be >= 1");
  BellMeasurement out;
  std::uint64_t k = 0;
  for (BondParity parity : {BondParity::odd, BondParity::even}) {
    BellHistogram h;
    h.parity = parity;
    h.pairs = parity_pairs(spec, parity);
    h.shots = shots;
    for (const auto& pair : h.pairs) {
      const auto p = bell_readout_distribution(rho.pair_density(pair.first, pair.second), pair, noise);
      Rng rng = make_rng(seed, "density-bell", k++);
      std::array<std::int64_t, 4> counts{};
      std::int64_t left = shots;
      double mass = 1.0;
      for (int o = 0; o < 3; ++o) {
        const double q = mass > 0.0 ? std::clamp(p[static_cast<std::size_t>(o)] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> bin(left, q);
        const std::int64_t n = left > 0 ? bin(rng) : 0;
        counts[static_cast<std::size_t>(o)] = n;
        left -= n;
        mass -= p[static_cast<std::size_t>(o)];
      }
      counts[3] = left;
      h.counts.push_back(counts);
    }
    out.histograms.push_back(std::move(h));
  }
  out.estimate = bell_energy_from_histograms(out.histograms, spec);
  return out;
}

}  // namespace chainvqe
