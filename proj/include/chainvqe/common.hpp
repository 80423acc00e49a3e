#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace chainvqe {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

/// Base class of every error raised by the library. The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid lattice geometry (odd site count, unsupported boundary, ...).
class GeometryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Request exceeds what a backend can do (too many qubits for dense ED, ...).
class CapabilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ArgumentError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Two-site gate requested on sites that are not neighbours in the MPS ordering.
class OrderingError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConvergenceError : public DomainError {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : DomainError(what), last_value_(last_value) {}
  double last_value() const { return last_value_; }

 private:
  double last_value_;
};

/// Assignment matrix too ill-conditioned to unfold.
class ConditioningError : public DomainError {
 public:
  ConditioningError(const std::string& what, double condition_number)
      : DomainError(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

class FitError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Problem with a configuration file or command-line override. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed derivation.  Every random stream is keyed by (seed, tag, index) so results
// do not depend on evaluation order.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, tag, index));
}

/// Uniform double in [0,1) built from the top 53 bits; portable across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Distance between two unitaries after optimal global-phase alignment (Frobenius norm).
double phase_invariant_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Pauli matrices; index 0..3 = I, X, Y, Z.
const Matrix2c& pauli(int index);

}  // namespace chainvqe
