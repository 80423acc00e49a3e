#pragma once
// Dense XXZ Hamiltonians from explicit Kronecker products, for checking the
// library's sparse apply and diagonalisation.

#include <Eigen/Dense>
#include <vector>

#include "chainvqe/model.hpp"
#include "density_oracle.hpp"

namespace oracle {

inline Eigen::MatrixXcd hamiltonian(int n, const std::vector<chainvqe::BondTerm>& bonds) {
  const int dim = 1 << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& b : bonds) {
    h += b.coupling.jx * pauli_string(n, b.site_a, 1, b.site_b, 1);
    h += b.coupling.jy * pauli_string(n, b.site_a, 2, b.site_b, 2);
    h += b.coupling.jz * pauli_string(n, b.site_a, 3, b.site_b, 3);
  }
  return h;
}

inline std::vector<chainvqe::BondTerm> open_chain(int n, double delta) {
  std::vector<chainvqe::BondTerm> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1, {1.0, 1.0, delta}});
  return bonds;
}

inline Eigen::VectorXd spectrum(const Eigen::MatrixXcd& h) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace oracle
