#include "chainvqe/common.hpp"

#include <array>
#include <cmath>

namespace chainvqe {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  // FNV-1a over the tag keeps the derivation stable and documented.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + index);
}

double phase_invariant_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("phase_invariant_distance: shape mismatch");
  }
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);
  return (a - phase * b).norm();
}

const Matrix2c& pauli(int index) {
  static const std::array<Matrix2c, 4> table = [] {
    std::array<Matrix2c, 4> t;
    t[0] = Matrix2c::Identity();
    t[1] << 0, 1, 1, 0;
    t[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    t[3] << 1, 0, 0, -1;
    return t;
  }();
  return table.at(static_cast<std::size_t>(index));
}

}  // namespace chainvqe
