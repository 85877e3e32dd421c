#pragma once

#include "manifolds/quadratic_constraint.hpp"

namespace cdopt::detail {

/// Column-wise x -> 2x / (1 + |x|^2). Sphere is the one-column case.
class ColumnNormalizingOperator {
 public:
  ColumnNormalizingOperator(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Vector apply(const Vector& x) const;
  /// The Jacobian is symmetric, so this is also the adjoint action.
  Vector diff(const Vector& x, const Vector& d) const;
  Vector adjoint_diff(const Vector& x, const Vector& d, const Vector& v) const;

 private:
  Index rows_;
  Index cols_;
};

/// A(X) = 3/2 X + a X L (X^T M X) N.
///
///   Stiefel family: L = I, M = B,   N = I, a = -1/2
///   Symplectic:     L = Q_s, M = Q_m, N = I, a = +1/2
///   Lie group:      L = I, M = R^T, N = R, a = -1/2
class PolynomialOperator {
 public:
  PolynomialOperator(Index rows, Index cols, std::optional<SparseMatrix> L,
                     std::optional<SparseMatrix> M, std::optional<SparseMatrix> N, double a);

  Vector apply(const Vector& x) const;
  Vector diff(const Vector& x, const Vector& d) const;
  Vector adjoint(const Vector& x, const Vector& v) const;
  Vector adjoint_diff(const Vector& x, const Vector& d, const Vector& v) const;

 private:
  Index rows_;
  Index cols_;
  std::optional<SparseMatrix> L_, M_, N_;
  double a_;
};

}  // namespace cdopt::detail
