#include "chainvqe/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace chainvqe {

void ChainSpec::validate() const {
  if (n_sites < 2 || n_sites % 2 != 0) {
    throw GeometryError("n_sites must be an even integer >= 2, got " + std::to_string(n_sites));
  }
  if (!std::isfinite(delta)) throw ArgumentError("delta must be finite");
  if (geometry == Geometry::two_leg_ladder && boundary == Boundary::periodic) {
    throw GeometryError("periodic boundary is not supported for the two-leg ladder");
  }
  if (boundary == Boundary::periodic && n_sites < 4) {
    throw GeometryError("periodic chains need at least 4 sites");
  }
}

BondLayout bond_layout(const ChainSpec& spec) {
  spec.validate();
  const Coupling c = Coupling::xxz(spec.delta);
  const int n = spec.n_sites;
  BondLayout layout;
  if (spec.geometry == Geometry::chain) {
    for (int a = 0; a + 1 < n; a += 2) layout.odd.push_back({a, a + 1, c});
    for (int a = 1; a + 1 < n; a += 2) layout.even.push_back({a, a + 1, c});
    if (spec.boundary == Boundary::periodic) layout.even.push_back({n - 1, 0, c});
    return layout;
  }
  const int rungs = spec.n_rungs();
  for (int r = 0; r + 1 < rungs; ++r) {
    auto& group = (r % 2 == 0) ? layout.odd : layout.even;
    for (int leg = 0; leg < 2; ++leg) group.push_back({2 * r + leg, 2 * (r + 1) + leg, c});
  }
  for (int r = 0; r < rungs; ++r) layout.rungs.push_back({2 * r, 2 * r + 1, c});
  return layout;
}

std::vector<BondTerm> build_hamiltonian(const ChainSpec& spec) {
  const BondLayout layout = bond_layout(spec);
  std::vector<BondTerm> all;
  all.reserve(layout.odd.size() + layout.even.size() + layout.rungs.size());
  for (const auto* group : {&layout.odd, &layout.even, &layout.rungs}) {
    all.insert(all.end(), group->begin(), group->end());
  }
  std::stable_sort(all.begin(), all.end(), [](const BondTerm& x, const BondTerm& y) {
    return std::pair(x.site_a, x.site_b) < std::pair(y.site_a, y.site_b);
  });
  return all;
}

std::vector<BondTerm> odd_bond_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const Coupling c = Coupling::xxz(spec.delta);
  std::vector<BondTerm> bonds;
  for (int a = 0; a + 1 < spec.n_sites; a += 2) bonds.push_back({a, a + 1, c});
  return bonds;
}

Matrix4c bond_matrix(const Coupling& c) {
  Matrix4c h = c.jx * Eigen::kroneckerProduct(pauli(1), pauli(1)).eval();
  h += c.jy * Eigen::kroneckerProduct(pauli(2), pauli(2)).eval();
  h += c.jz * Eigen::kroneckerProduct(pauli(3), pauli(3)).eval();
  return h;
}

std::array<double, 4> bell_state_energies(const Coupling& c) {
  return {c.jx - c.jy + c.jz, -c.jx + c.jy + c.jz, c.jx + c.jy - c.jz, -c.jx - c.jy - c.jz};
}

Eigen::Matrix4d bond_propagator(const Coupling& c, double tau) {
  // {|00>,|11>} block: jz + (jx - jy) sx;  {|01>,|10>} block: -jz + (jx + jy) sx.
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  const auto block = [&](int i, int j, double diag, double off) {
    const double e = std::exp(-tau * diag);
    g(i, i) = g(j, j) = e * std::cosh(tau * off);
    g(i, j) = g(j, i) = -e * std::sinh(tau * off);
  };
  block(0, 3, c.jz, c.jx - c.jy);
  block(1, 2, -c.jz, c.jx + c.jy);
  return g;
}

double SpectrumResult::gap() const {
  if (eigenvalues.size() < 2) throw ArgumentError("spectrum holds fewer than two levels");
  return eigenvalues[1] - eigenvalues[0];
}

SpinHamiltonian::SpinHamiltonian(int n_sites, std::vector<BondTerm> bonds)
    : n_sites_(n_sites), bonds_(std::move(bonds)) {
  if (n_sites_ < 1 || n_sites_ > 30) throw CapabilityError("SpinHamiltonian supports 1..30 sites");
  for (const auto& b : bonds_) {
    if (b.site_a == b.site_b || b.site_a < 0 || b.site_b < 0 || b.site_a >= n_sites_ ||
        b.site_b >= n_sites_) {
      throw ArgumentError("bond term has invalid sites");
    }
  }
}

void SpinHamiltonian::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const std::size_t dim = dimension();
  y.setZero(static_cast<Eigen::Index>(dim));
  for (const auto& b : bonds_) {
    const std::size_t ma = std::size_t{1} << b.site_a;
    const std::size_t mb = std::size_t{1} << b.site_b;
    const std::size_t flip = ma | mb;
    const double parallel_off = b.coupling.jx - b.coupling.jy;
    const double anti_off = b.coupling.jx + b.coupling.jy;
    const double jz = b.coupling.jz;
    for (std::size_t i = 0; i < dim; ++i) {
      const bool same = ((i & ma) != 0) == ((i & mb) != 0);
      const double xi = x[static_cast<Eigen::Index>(i)];
      y[static_cast<Eigen::Index>(i)] += (same ? jz : -jz) * xi;
      y[static_cast<Eigen::Index>(i ^ flip)] += (same ? parallel_off : anti_off) * xi;
    }
  }
}

Eigen::MatrixXd SpinHamiltonian::dense() const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd h(dim, dim);
  Eigen::VectorXd e(dim), col(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e.setZero();
    e[j] = 1.0;
    apply(e, col);
    h.col(j) = col;
  }
  return h;
}

namespace {

struct Eigenpair {
  double value;
  Eigen::VectorXd vector;
};

// Restarted Lanczos with full reorthogonalisation for the lowest eigenpair of H
// restricted to the orthogonal complement of `deflate`.
Eigenpair lanczos_lowest(const SpinHamiltonian& h, const std::vector<Eigen::VectorXd>& deflate,
                         const DiagonalizationOptions& opt, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const auto project = [&](Eigen::VectorXd& v) {
    for (const auto& d : deflate) v -= d.dot(v) * d;
  };

  Eigen::VectorXd start(dim);
  Rng rng = make_rng(seed, "lanczos-start");
  for (Eigen::Index i = 0; i < dim; ++i) start[i] = uniform01(rng) - 0.5;
  project(start);
  start.normalize();

  const int m = static_cast<int>(std::min<Eigen::Index>(opt.lanczos_krylov, dim));
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(m) + 1);
  Eigen::VectorXd w(dim);
  double last = 0.0;
  for (int restart = 0; restart < opt.lanczos_max_restarts; ++restart) {
    basis.clear();
    basis.push_back(start);
    std::vector<double> alpha, beta;
    for (int j = 0; j < m; ++j) {
      h.apply(basis[static_cast<std::size_t>(j)], w);
      project(w);
      alpha.push_back(basis[static_cast<std::size_t>(j)].dot(w));
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) w -= v.dot(w) * v;
        project(w);
      }
      const double b = w.norm();
      if (b < 1e-13 || j + 1 == m) {
        beta.push_back(b);
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
    const double value = tri.eigenvalues()[0];
    const Eigen::VectorXd s = tri.eigenvectors().col(0);
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < k; ++i) ritz += s[i] * basis[static_cast<std::size_t>(i)];
    project(ritz);
    ritz.normalize();
    const double residual = std::abs(beta.back() * s[k - 1]);
    last = value;
    if (residual < opt.lanczos_tol * std::max(1.0, std::abs(value)) || beta.back() < 1e-13) {
      return {value, ritz};
    }
    start = ritz;
  }
  throw ConvergenceError("Lanczos did not converge", last);
}

}  // namespace

SpectrumResult diagonalize(int n_sites, const std::vector<BondTerm>& bonds, int n_levels,
                           const DiagonalizationOptions& options) {
  if (n_sites > options.max_sites) {
    throw CapabilityError("exact diagonalisation is capped at " + std::to_string(options.max_sites) +
                          " sites; use the MPS backend for N = " + std::to_string(n_sites));
  }
  if (n_levels < 1) throw ArgumentError("n_levels must be >= 1");
  const SpinHamiltonian h(n_sites, bonds);
  SpectrumResult result;
  if (n_sites <= options.dense_max_sites) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense());
    const auto& ev = solver.eigenvalues();
    result.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    result.ground_vector = solver.eigenvectors().col(0);
    return result;
  }
  std::vector<Eigen::VectorXd> found;
  for (int level = 0; level < n_levels; ++level) {
    Eigenpair pair = lanczos_lowest(h, found, options, static_cast<std::uint64_t>(level));
    result.eigenvalues.push_back(pair.value);
    found.push_back(std::move(pair.vector));
  }
  // Deflated levels can come back out of order only by round-off.
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end());
  result.ground_vector = found.front();
  return result;
}

SpectrumResult exact_ground_state(const ChainSpec& spec, const DiagonalizationOptions& options) {
  return diagonalize(spec.n_sites, build_hamiltonian(spec), 2, options);
}

std::vector<GapPoint> gap_scan(const ChainSpec& spec, std::span<const double> s_grid,
                               const DiagonalizationOptions& options) {
  if (s_grid.empty()) throw ArgumentError("gap_scan: empty s grid");
  const BondLayout layout = bond_layout(spec);
  if (spec.geometry != Geometry::chain) throw GeometryError("gap_scan is defined for chains");
  std::vector<GapPoint> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("gap_scan: s must lie in [0, 1]");
    std::vector<BondTerm> bonds = layout.odd;
    for (BondTerm b : layout.even) {
      b.coupling = b.coupling.scaled(s);
      bonds.push_back(b);
    }
    const SpectrumResult spectrum = diagonalize(spec.n_sites, bonds, 2, options);
    out.push_back({s, spectrum.gap(), spectrum.ground_energy()});
  }
  return out;
}

double bell_pair_energy(const ChainSpec& spec) {
  spec.validate();
  return -(2.0 + spec.delta) * spec.n_sites / 2.0;
}

double bethe_energy_density() { return 1.0 - 4.0 * std::numbers::ln2; }

}  // namespace chainvqe
