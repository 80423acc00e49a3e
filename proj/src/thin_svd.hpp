#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace chainvqe::detail {

// Thin SVD with descending singular values.  Large blocks go through the
// eigendecomposition of the smaller Gram matrix, which is several times faster
// than a bidiagonal SVD; the singular values lost that way (below ~1e-8 of the
// largest) carry far less weight than any truncation cutoff in use.
template <class Matrix>
struct ThinSvd {
  Matrix u;
  Eigen::VectorXd s;
  Matrix vh;
};

constexpr Eigen::Index kGramThreshold = 16;

template <class Matrix>
ThinSvd<Matrix> thin_svd(const Matrix& m) {
  ThinSvd<Matrix> out;
  if (std::min(m.rows(), m.cols()) < kGramThreshold) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.vh = svd.matrixV().adjoint();
    return out;
  }
  const bool wide = m.rows() <= m.cols();
  const Matrix g = wide ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Eigen::Index k = g.rows();
  const double top = std::sqrt(std::max(es.eigenvalues()[k - 1], 0.0));
  Eigen::Index rank = 0;
  while (rank < k && std::sqrt(std::max(es.eigenvalues()[k - 1 - rank], 0.0)) > 1e-14 * top) ++rank;
  rank = std::max<Eigen::Index>(rank, 1);
  out.s.resize(rank);
  Matrix vecs(k, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    out.s[j] = std::sqrt(std::max(es.eigenvalues()[k - 1 - j], 0.0));
    vecs.col(j) = es.eigenvectors().col(k - 1 - j);
  }
  const Eigen::VectorXd inv = out.s.cwiseInverse();
  if (wide) {
    out.u = vecs;
    out.vh = inv.asDiagonal() * (vecs.adjoint() * m);
  } else {
    out.vh = vecs.adjoint();
    out.u = (m * vecs) * inv.asDiagonal();
  }
  return out;
}

}  // namespace chainvqe::detail
