#include "chainvqe/mps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "thin_svd.hpp"

namespace chainvqe {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

template <class T>
struct ScalarName;
template <>
struct ScalarName<double> {
  static constexpr const char* value = "real";
};
template <>
struct ScalarName<Complex> {
  static constexpr const char* value = "complex";
};

double real_part(double x) { return x; }
double real_part(const Complex& x) { return x.real(); }

template <class T>
Eigen::Matrix<T, 4, 4> swap_gate() {
  Eigen::Matrix<T, 4, 4> s = Eigen::Matrix<T, 4, 4>::Zero();
  s(0, 0) = s(3, 3) = 1;
  s(1, 2) = s(2, 1) = 1;
  return s;
}

// Real 2x2 operators whose two-site products give XX, -YY and ZZ.
template <class T>
std::array<Eigen::Matrix<T, 2, 2>, 3> real_paulis() {
  Eigen::Matrix<T, 2, 2> x, xz, z;
  x << 0, 1, 1, 0;
  xz << 0, -1, 1, 0;  // X Z = -i Y
  z << 1, 0, 0, -1;
  return {x, xz, z};
}

template <class T>
json matrix_to_json(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if constexpr (std::is_same_v<T, double>) {
        re.push_back(m(i, j));
      } else {
        re.push_back(m(i, j).real());
        im.push_back(m(i, j).imag());
      }
    }
  }
  json out = {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}};
  if (!im.empty()) out["im"] = im;
  return out;
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& re = j.at("re");
  if (static_cast<Eigen::Index>(re.size()) != rows * cols) throw ArgumentError("checkpoint: bad tensor size");
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto idx = static_cast<std::size_t>(i * cols + k);
      if constexpr (std::is_same_v<T, double>) {
        m(i, k) = re[idx].get<double>();
      } else {
        const double imag = j.contains("im") ? j["im"][idx].get<double>() : 0.0;
        m(i, k) = Complex(re[idx].get<double>(), imag);
      }
    }
  }
  return m;
}

}  // namespace

template <class T>
Mps<T>::Mps(std::vector<Site> sites, int center, MpsOptions options)
    : sites_(std::move(sites)), center_(center), options_(options) {
  if (sites_.empty()) throw ArgumentError("MPS needs at least one site");
  if (center_ < 0 || center_ >= n_sites()) throw ArgumentError("MPS centre out of range");
  if (options_.chi_max < 1) throw ArgumentError("chi_max must be >= 1");
  for (int k = 0; k < n_sites(); ++k) {
    const Site& s = site(k);
    if (s[0].rows() != s[1].rows() || s[0].cols() != s[1].cols()) {
      throw ArgumentError("MPS site tensors have inconsistent shapes");
    }
    if (k + 1 < n_sites() && s[0].cols() != site(k + 1)[0].rows()) {
      throw ArgumentError("MPS bond dimensions do not match");
    }
  }
  if (site(0)[0].rows() != 1 || site(n_sites() - 1)[0].cols() != 1) {
    throw ArgumentError("MPS boundary bonds must have dimension 1");
  }
}

template <class T>
Mps<T> Mps<T>::singlets(int n_sites, MpsOptions options) {
  if (n_sites < 2 || n_sites % 2 != 0) throw GeometryError("singlet MPS needs an even number of sites");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Site> sites;
  for (int k = 0; k < n_sites; k += 2) {
    Site a{Matrix::Zero(1, 2), Matrix::Zero(1, 2)};
    a[0](0, 0) = 1;
    a[1](0, 1) = 1;
    // amplitude(s_a, s_b) = a[s_a] b[s_b]: (0,1) -> +r, (1,0) -> -r
    Site b{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
    b[1](0, 0) = r;
    b[0](1, 0) = -r;
    sites.push_back(std::move(a));
    sites.push_back(std::move(b));
  }
  // Every tensor is left-orthonormal, so the centre can sit on the last site.
  return Mps(std::move(sites), n_sites - 1, options);
}

template <class T>
Mps<T> Mps<T>::product(std::span<const int> bits, MpsOptions options) {
  std::vector<Site> sites;
  for (int b : bits) {
    if (b != 0 && b != 1) throw ArgumentError("product state bits must be 0 or 1");
    Site s{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
    s[static_cast<std::size_t>(b)](0, 0) = 1;
    sites.push_back(std::move(s));
  }
  return Mps(std::move(sites), 0, options);
}

template <class T>
int Mps<T>::bond_dimension(int k) const {
  if (k < 0 || k + 1 >= n_sites()) throw ArgumentError("bond index out of range");
  return static_cast<int>(site(k)[0].cols());
}

template <class T>
int Mps<T>::max_bond_dimension() const {
  int d = 1;
  for (int k = 0; k + 1 < n_sites(); ++k) d = std::max(d, bond_dimension(k));
  return d;
}

template <class T>
void Mps<T>::move_right() {
  Site& a = sites_[static_cast<std::size_t>(center_)];
  Site& next = sites_[static_cast<std::size_t>(center_ + 1)];
  const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
  Matrix m(2 * dl, dr);
  m << a[0], a[1];
  Eigen::HouseholderQR<Matrix> qr(m);
  const Eigen::Index k = std::min(2 * dl, dr);
  const Matrix q = qr.householderQ() * Matrix::Identity(2 * dl, k);
  const Matrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  a[0] = q.topRows(dl);
  a[1] = q.bottomRows(dl);
  next[0] = r * next[0];
  next[1] = r * next[1];
  ++center_;
}

template <class T>
void Mps<T>::move_left() {
  Site& a = sites_[static_cast<std::size_t>(center_)];
  Site& prev = sites_[static_cast<std::size_t>(center_ - 1)];
  const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
  Matrix m(dl, 2 * dr);
  m << a[0], a[1];
  const Matrix mh = m.adjoint();
  Eigen::HouseholderQR<Matrix> qr(mh);
  const Eigen::Index k = std::min(dl, 2 * dr);
  const Matrix q = qr.householderQ() * Matrix::Identity(2 * dr, k);
  const Matrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  // m = r^H q^H
  const Matrix qh = q.adjoint();
  a[0] = qh.leftCols(dr);
  a[1] = qh.rightCols(dr);
  const Matrix rh = r.adjoint();
  prev[0] = prev[0] * rh;
  prev[1] = prev[1] * rh;
  --center_;
}

template <class T>
void Mps<T>::move_center(int target) {
  if (target < 0 || target >= n_sites()) throw ArgumentError("MPS centre out of range");
  while (center_ < target) move_right();
  while (center_ > target) move_left();
}

template <class T>
double Mps<T>::norm() const {
  const Site& c = site(center_);
  return std::sqrt(c[0].squaredNorm() + c[1].squaredNorm());
}

template <class T>
void Mps<T>::normalize() {
  const double n = norm();
  if (n == 0.0) throw ArgumentError("cannot normalise a zero MPS");
  for (auto& m : sites_[static_cast<std::size_t>(center_)]) m /= n;
}

template <class T>
void Mps<T>::apply_one_site(const Op1& u, int q) {
  if (q < 0 || q >= n_sites()) throw ArgumentError("site out of range");
  Site& s = sites_[static_cast<std::size_t>(q)];
  const Matrix a0 = s[0], a1 = s[1];
  s[0] = u(0, 0) * a0 + u(0, 1) * a1;
  s[1] = u(1, 0) * a0 + u(1, 1) * a1;
  // A unitary on the centre or any site keeps the canonical form only if unitary;
  // callers pass unitaries.
}

template <class T>
void Mps<T>::apply_two_site(const Op2& u_in, int a, int b, bool center_left) {
  if (a < 0 || b < 0 || a >= n_sites() || b >= n_sites()) throw ArgumentError("site out of range");
  if (std::abs(a - b) != 1) {
    throw OrderingError("two-site gate on sites " + std::to_string(a) + " and " + std::to_string(b) +
                        " which are not neighbours in the MPS ordering");
  }
  Op2 u = u_in;
  if (b < a) {
    const Op2 s = swap_gate<T>();
    u = s * u_in * s;
    std::swap(a, b);
  }
  if (center_ != a && center_ != b) move_center(center_ < a ? a : b);
  if (center_ == b) move_left();

  const Site& A = site(a);
  const Site& B = site(b);
  const Eigen::Index dl = A[0].rows(), dr = B[0].cols();
  Matrix theta[2][2];
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) theta[s1][s2] = A[static_cast<std::size_t>(s1)] * B[static_cast<std::size_t>(s2)];
  }
  Matrix m = Matrix::Zero(2 * dl, 2 * dr);
  for (int t1 = 0; t1 < 2; ++t1) {
    for (int t2 = 0; t2 < 2; ++t2) {
      auto block = m.block(t1 * dl, t2 * dr, dl, dr);
      for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) {
          const T c = u(2 * t1 + t2, 2 * s1 + s2);
          if (c != T(0)) block += c * theta[s1][s2];
        }
      }
    }
  }

  const detail::ThinSvd<Matrix> svd = detail::thin_svd(m);
  const auto& sv = svd.s;
  const Eigen::Index rank = sv.size();
  const double total = sv.squaredNorm();
  if (!(total > 0.0)) throw ArgumentError("two-site gate annihilated the state");
  Eigen::Index keep = std::min<Eigen::Index>(rank, options_.chi_max);
  // Drop the smallest values while the discarded fraction stays below the cutoff.
  double tail = 0.0;
  for (Eigen::Index k = rank - 1; k >= keep; --k) tail += sv[k] * sv[k];
  while (keep > 1) {
    const double w = sv[keep - 1] * sv[keep - 1];
    if ((tail + w) / total > options_.svd_cutoff) break;
    tail += w;
    --keep;
  }
  log_.record(tail / total);

  Eigen::VectorXd s = sv.head(keep);
  s /= s.norm();
  const Matrix uk = svd.u.leftCols(keep);
  const Matrix vh = svd.vh.topRows(keep);
  Site& na = sites_[static_cast<std::size_t>(a)];
  Site& nb = sites_[static_cast<std::size_t>(b)];
  if (center_left) {
    const Matrix us = uk * s.cast<T>().asDiagonal();
    na[0] = us.topRows(dl);
    na[1] = us.bottomRows(dl);
    nb[0] = vh.leftCols(dr);
    nb[1] = vh.rightCols(dr);
    center_ = a;
  } else {
    const Matrix sv_h = s.cast<T>().asDiagonal() * vh;
    na[0] = uk.topRows(dl);
    na[1] = uk.bottomRows(dl);
    nb[0] = sv_h.leftCols(dr);
    nb[1] = sv_h.rightCols(dr);
    center_ = b;
  }
}

template <class T>
void Mps<T>::apply_two_site_routed(const Op2& u, int a, int b) {
  if (a == b) throw ArgumentError("two-site gate needs distinct sites");
  if (std::abs(a - b) == 1) {
    apply_two_site(u, a, b);
    return;
  }
  // Bring b next to a by swapping it leftwards (or rightwards), then undo.
  const Op2 s = swap_gate<T>();
  const int step = (b > a) ? -1 : 1;
  int pos = b;
  while (std::abs(pos - a) > 1) {
    apply_two_site(s, pos + step, pos);
    pos += step;
  }
  apply_two_site(u, a, pos);
  while (pos != b) {
    apply_two_site(s, pos, pos - step);
    pos -= step;
  }
}

template <class T>
T Mps<T>::correlator(std::span<const std::pair<int, Op1>> ops) {
  if (ops.empty()) return T(1);
  std::vector<std::pair<int, Op1>> sorted(ops.begin(), ops.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].first < 0 || sorted[i].first >= n_sites()) throw ArgumentError("site out of range");
    if (i > 0 && sorted[i].first == sorted[i - 1].first) throw ArgumentError("correlator sites must be distinct");
  }
  const int first = sorted.front().first;
  const int last = sorted.back().first;
  move_center(first);
  Matrix env = Matrix::Identity(site(first)[0].rows(), site(first)[0].rows());
  std::size_t next = 0;
  for (int k = first; k <= last; ++k) {
    const Site& s = site(k);
    Matrix out = Matrix::Zero(s[0].cols(), s[0].cols());
    if (next < sorted.size() && sorted[next].first == k) {
      const Op1& o = sorted[next].second;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          if (o(a, b) != T(0)) out += o(a, b) * (s[static_cast<std::size_t>(a)].adjoint() * env * s[static_cast<std::size_t>(b)]);
        }
      }
      ++next;
    } else {
      out = s[0].adjoint() * env * s[0] + s[1].adjoint() * env * s[1];
    }
    env = std::move(out);
  }
  return env.trace();
}

template <class T>
double Mps<T>::expectation(std::span<const BondTerm> bonds) {
  std::vector<BondTerm> sorted(bonds.begin(), bonds.end());
  std::sort(sorted.begin(), sorted.end(), [](const BondTerm& x, const BondTerm& y) {
    return std::min(x.site_a, x.site_b) < std::min(y.site_a, y.site_b);
  });
  const auto p = real_paulis<T>();
  const double n2 = norm() * norm();
  double e = 0.0;
  for (const auto& b : sorted) {
    const double w[3] = {b.coupling.jx, -b.coupling.jy, b.coupling.jz};
    for (int k = 0; k < 3; ++k) {
      if (w[k] == 0.0) continue;
      const std::pair<int, Op1> ops[2] = {{b.site_a, p[static_cast<std::size_t>(k)]},
                                         {b.site_b, p[static_cast<std::size_t>(k)]}};
      e += w[k] * real_part(correlator(ops));
    }
  }
  return e / n2;
}

template <class T>
ShotRecord Mps<T>::sample(std::int64_t shots, std::uint64_t seed, const NoiseModel& noise) {
  if (shots < 0) throw ArgumentError("shot count must be non-negative");
  move_center(0);
  const int n = n_sites();
  std::vector<std::array<double, 2>> flip(static_cast<std::size_t>(n), {0.0, 0.0});
  for (int q = 0; q < n && !noise.readout.empty(); ++q) {
    const Eigen::Matrix2d m = noise.confusion(q);
    flip[static_cast<std::size_t>(q)] = {m(1, 0), m(0, 1)};
  }
  Rng rng = make_rng(seed, "mps-sample");
  ShotRecord rec;
  rec.shots = shots;
  rec.seed = seed;
  std::string bits(static_cast<std::size_t>(n), '0');
  using Row = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  for (std::int64_t shot = 0; shot < shots; ++shot) {
    Row v = Row::Ones(1);
    for (int k = 0; k < n; ++k) {
      const Row w0 = v * site(k)[0];
      const Row w1 = v * site(k)[1];
      const double p0 = w0.squaredNorm();
      const double p1 = w1.squaredNorm();
      const double tot = p0 + p1;
      const int bit = (uniform01(rng) * tot < p0) ? 0 : 1;
      v = (bit == 0 ? w0 : w1) / std::sqrt(bit == 0 ? p0 : p1);
      int read = bit;
      if (uniform01(rng) < flip[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)]) read ^= 1;
      bits[static_cast<std::size_t>(k)] = static_cast<char>('0' + read);
    }
    ++rec.counts[bits];
  }
  return rec;
}

template <class T>
DenseState Mps<T>::to_dense(int max_qubits) const {
  const int n = n_sites();
  if (n > max_qubits) throw CapabilityError("to_dense: too many sites");
  // Contract left to right keeping (basis prefix) x (bond) rows.
  Matrix acc = Matrix::Ones(1, 1);
  for (int k = 0; k < n; ++k) {
    const Site& s = site(k);
    const Eigen::Index rows = acc.rows();
    Matrix next(2 * rows, s[0].cols());
    // New prefix index = old + bit * 2^k (little-endian).
    next.topRows(rows) = acc * s[0];
    next.bottomRows(rows) = acc * s[1];
    acc = std::move(next);
  }
  std::vector<Complex> amps(static_cast<std::size_t>(acc.rows()));
  for (Eigen::Index i = 0; i < acc.rows(); ++i) amps[static_cast<std::size_t>(i)] = Complex(acc(i, 0));
  return DenseState(n, std::move(amps));
}

template <class T>
std::string Mps<T>::to_json() const {
  json j;
  j["format"] = "chainvqe-mps";
  j["version"] = kCheckpointVersion;
  j["scalar"] = ScalarName<T>::value;
  j["n_sites"] = n_sites();
  j["center"] = center_;
  j["chi_max"] = options_.chi_max;
  j["svd_cutoff"] = options_.svd_cutoff;
  j["discarded_weight"] = log_.total();
  json sites = json::array();
  for (const Site& s : sites_) sites.push_back({matrix_to_json<T>(s[0]), matrix_to_json<T>(s[1])});
  j["sites"] = std::move(sites);
  return j.dump();
}

template <class T>
Mps<T> Mps<T>::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "chainvqe-mps") throw ArgumentError("not an MPS checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ArgumentError("unsupported MPS checkpoint version " + std::to_string(j.value("version", 0)));
  }
  if (j.value("scalar", "") != ScalarName<T>::value) throw ArgumentError("checkpoint scalar type mismatch");
  std::vector<Site> sites;
  for (const auto& s : j.at("sites")) sites.push_back({matrix_from_json<T>(s.at(0)), matrix_from_json<T>(s.at(1))});
  MpsOptions opt{j.at("chi_max").get<int>(), j.at("svd_cutoff").get<double>()};
  Mps m(std::move(sites), j.at("center").get<int>(), opt);
  const double w = j.value("discarded_weight", 0.0);
  if (w > 0.0) m.log_.record(w);
  return m;
}

template <class T>
void Mps<T>::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot write checkpoint " + path);
  os << to_json();
}

template <class T>
Mps<T> Mps<T>::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

template class Mps<double>;
template class Mps<Complex>;

ComplexMps to_complex(const RealMps& m) {
  std::vector<ComplexMps::Site> sites;
  for (int k = 0; k < m.n_sites(); ++k) {
    sites.push_back({m.site(k)[0].cast<Complex>(), m.site(k)[1].cast<Complex>()});
  }
  return ComplexMps(std::move(sites), m.center(), m.options());
}

Complex overlap(const ComplexMps& a, const ComplexMps& b) {
  if (a.n_sites() != b.n_sites()) throw ArgumentError("overlap: site counts differ");
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
  for (int k = 0; k < a.n_sites(); ++k) {
    env = a.site(k)[0].adjoint() * env * b.site(k)[0] + a.site(k)[1].adjoint() * env * b.site(k)[1];
  }
  return env(0, 0);
}

double mps_overlap(const ComplexMps& a, const ComplexMps& b) {
  return std::abs(overlap(a, b)) / (a.norm() * b.norm());
}

double mps_overlap(const ComplexMps& a, const RealMps& b) { return mps_overlap(a, to_complex(b)); }

ComplexMps mps_singlets(int n_sites, MpsOptions options) { return ComplexMps::singlets(n_sites, options); }

Matrix4c reduced_density_matrix(ComplexMps& state, int a, int b) {
  Matrix4c rho = Matrix4c::Zero();
  const double n2 = state.norm() * state.norm();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Complex v = 1.0;
      if (i == 0 && j == 0) {
        v = n2;
      } else {
        std::vector<std::pair<int, Matrix2c>> ops;
        if (i > 0) ops.emplace_back(a, pauli(i));
        if (j > 0) ops.emplace_back(b, pauli(j));
        v = state.correlator(ops);
      }
      // basis |q_a q_b>, index 2 q_a + q_b: sigma_i on a is the left Kronecker factor
      Matrix4c p;
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) p(r, c) = pauli(i)(r / 2, c / 2) * pauli(j)(r % 2, c % 2);
      }
      rho += (v / n2).real() * p;
    }
  }
  return rho / 4.0;
}

ComplexMps mps_ansatz_state(const ChainSpec& spec, const AnsatzParams& params, MpsOptions options) {
  spec.validate();
  params.validate();
  ComplexMps m = ComplexMps::singlets(spec.n_sites, options);
  const BondLayout layout = bond_layout(spec);
  const auto apply_group = [&](const std::vector<BondTerm>& bonds, const BondAngles& a) {
    const Matrix4c u = rxyz_matrix(2 * a.x, 2 * a.y, 2 * a.z);
    for (const auto& b : bonds) m.apply_two_site_routed(u, b.site_a, b.site_b);
  };
  for (const auto& layer : params.layers) {
    if (spec.geometry == Geometry::chain) {
      if (spec.boundary == Boundary::periodic) throw CapabilityError("the MPS backend handles open chains only");
      apply_group(layout.even, layer.even);
      apply_group(layout.odd, layer.odd);
    } else {
      apply_group(layout.odd, layer.odd);
      apply_group(layout.even, layer.even);
      apply_group(layout.rungs, layer.rung);
    }
  }
  return m;
}

MpsAnsatzResult mps_ansatz_energy(const ChainSpec& spec, const AnsatzParams& params, MpsOptions options,
                                  double max_discarded) {
  MpsAnsatzResult r;
  r.state = mps_ansatz_state(spec, params, options);
  const auto bonds = build_hamiltonian(spec);
  r.energy = r.state.expectation(bonds);
  r.discarded_weight = r.state.log().total();
  r.max_bond_dimension = r.state.max_bond_dimension();
  if (r.discarded_weight > max_discarded) {
    std::ostringstream os;
    os << "truncation discarded weight " << r.discarded_weight << " exceeds " << max_discarded
       << "; raise chi_max";
    r.warnings.push_back(os.str());
  }
  return r;
}

namespace {

// Sweeps the gates of one bond group, alternating direction to avoid idle centre moves.
void apply_propagators(RealMps& m, const std::vector<BondTerm>& bonds, double tau) {
  if (bonds.empty()) return;
  const int c = m.center();
  const bool left_to_right =
      std::abs(c - bonds.front().site_a) <= std::abs(c - bonds.back().site_b);
  if (left_to_right) {
    for (const auto& b : bonds) m.apply_two_site(bond_propagator(b.coupling, tau), b.site_a, b.site_b);
  } else {
    for (auto it = bonds.rbegin(); it != bonds.rend(); ++it) {
      m.apply_two_site(bond_propagator(it->coupling, tau), it->site_a, it->site_b, true);
    }
  }
}

}  // namespace

ItebdResult itebd_ground_state(const ChainSpec& spec, MpsOptions options, const ItebdOptions& itebd,
                               const RealMps* initial) {
  spec.validate();
  if (spec.geometry != Geometry::chain || spec.boundary != Boundary::open) {
    throw CapabilityError("imaginary-time TEBD supports open chains only");
  }
  if (!(spec.delta > -1.0)) throw ArgumentError("imaginary-time TEBD needs delta > -1");
  if (itebd.dtau_schedule.empty() || itebd.check_every < 1) throw ArgumentError("bad TEBD schedule");
  const BondLayout layout = bond_layout(spec);
  const auto bonds = build_hamiltonian(spec);

  ItebdResult r;
  r.state = initial ? *initial : RealMps::singlets(spec.n_sites, options);
  if (r.state.n_sites() != spec.n_sites) throw ArgumentError("initial MPS has the wrong size");
  double energy = r.state.expectation(bonds);
  r.energy_history.push_back(energy);
  const double tol = itebd.tol_per_site * spec.n_sites;
  for (double tau : itebd.dtau_schedule) {
    if (!(tau > 0.0)) throw ArgumentError("dtau must be positive");
    bool converged = false;
    for (int step = 0; step < itebd.max_steps_per_stage; step += itebd.check_every) {
      for (int k = 0; k < itebd.check_every; ++k) {
        apply_propagators(r.state, layout.odd, tau / 2);
        apply_propagators(r.state, layout.even, tau);
        apply_propagators(r.state, layout.odd, tau / 2);
        r.state.normalize();
        ++r.steps;
      }
      const double e = r.state.expectation(bonds);
      r.energy_history.push_back(e);
      // Rate per unit imaginary time, so small steps do not stop early.
      const double rate = std::abs(e - energy) / (tau * itebd.check_every);
      energy = e;
      if (rate < tol) {
        converged = true;
        break;
      }
    }
    if (!itebd.checkpoint_path.empty()) r.state.save(itebd.checkpoint_path);
    if (!converged) {
      throw ConvergenceError("imaginary-time TEBD did not converge at dtau = " + std::to_string(tau), energy);
    }
  }
  r.energy = energy;
  return r;
}

}  // namespace chainvqe
