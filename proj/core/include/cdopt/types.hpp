#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace cdopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Rng = std::mt19937_64;

/// Contracts describing a smooth function R^n -> R. `hess_vec` may be empty.
///
/// Points are flat column-major vectors; the matrix shape of a point lives on
/// the ManifoldSpec that owns it.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hess_vec;

  bool has_hessian() const { return static_cast<bool>(hess_vec); }
};

/// Reinterpret a flat column-major vector as a rows x cols matrix.
inline Eigen::Map<const Matrix> as_matrix(const Vector& x, Index rows, Index cols) {
  return {x.data(), rows, cols};
}

inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Deterministic 64-bit seed derived from a master seed and a label (FNV-1a).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 14695981039346656037ULL ^ master;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace cdopt
