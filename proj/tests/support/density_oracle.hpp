#pragma once
// Brute-force density-matrix simulator used as an independent reference in tests.
// Qubit q is bit q of the basis index.  Each CNOT is followed by the uniform
// 15-Pauli channel written out term by term.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "chainvqe/circuits.hpp"
#include "chainvqe/common.hpp"

namespace oracle {

using Cplx = std::complex<double>;
using Dm = Eigen::MatrixXcd;

inline Eigen::MatrixXcd embed_1q(int n, int q, const Eigen::Matrix2cd& g) {
  const int dim = 1 << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const int bi = (i >> q) & 1;
    for (int b = 0; b < 2; ++b) u(i ^ ((bi ^ b) << q), i) += g(b, bi);
  }
  return u;
}

inline Eigen::MatrixXcd embed_cnot(int n, int c, int t) {
  const int dim = 1 << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) u(((i >> c) & 1) ? i ^ (1 << t) : i, i) = 1.0;
  return u;
}

inline Eigen::MatrixXcd pauli_string(int n, int qa, int pa, int qb, int pb) {
  return embed_1q(n, qa, chainvqe::pauli(pa)) * embed_1q(n, qb, chainvqe::pauli(pb));
}

inline Dm run(const chainvqe::Circuit& c, double p2, Dm rho) {
  const int n = c.n_qubits();
  for (const auto& g : c.gates()) {
    if (g.kind == chainvqe::GateKind::cnot) {
      const Eigen::MatrixXcd u = embed_cnot(n, g.q0, g.q1);
      rho = u * rho * u.adjoint();
      if (p2 > 0.0) {
        Dm acc = (1.0 - p2) * rho;
        for (int k = 1; k < 16; ++k) {
          const Eigen::MatrixXcd p = pauli_string(n, g.q0, k / 4, g.q1, k % 4);
          acc += (p2 / 15.0) * p * rho * p.adjoint();
        }
        rho = acc;
      }
    } else {
      const Eigen::MatrixXcd u = embed_1q(n, g.q0, chainvqe::native_matrix_1q(g));
      rho = u * rho * u.adjoint();
    }
  }
  return rho;
}

inline Dm zero_state(int n) {
  Dm rho = Dm::Zero(1 << n, 1 << n);
  rho(0, 0) = 1.0;
  return rho;
}

}  // namespace oracle
