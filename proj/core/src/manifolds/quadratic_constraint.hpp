#pragma once

#include "manifolds/vectorization.hpp"

#include <optional>

namespace cdopt::detail {

/// Left/right multiplication by a structure matrix where nullopt means I.
Matrix left(const std::optional<SparseMatrix>& M, const Matrix& X);
Matrix left_t(const std::optional<SparseMatrix>& M, const Matrix& X);
Matrix right(const Matrix& X, const std::optional<SparseMatrix>& M);
Matrix right_t(const Matrix& X, const std::optional<SparseMatrix>& M);

/// c(X) = pack(X^T M X - K) for X in R^{rows x cols}.
class QuadraticConstraint {
 public:
  QuadraticConstraint(Index rows, Index cols, std::optional<SparseMatrix> M, Matrix K,
                      ResidualShape shape);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index dim() const { return packed_size(shape_, cols_); }
  ResidualShape shape() const { return shape_; }
  const std::optional<SparseMatrix>& weight() const { return M_; }

  Vector value(const Vector& x) const;
  Vector jac_apply(const Vector& x, const Vector& v) const;
  Vector jac_adjoint_apply(const Vector& x, const Vector& d) const;
  Vector jac_diff_apply(const Vector& x, const Vector& d, const Vector& w) const;

 private:
  Index rows_;
  Index cols_;
  std::optional<SparseMatrix> M_;
  Matrix K_;
  ResidualShape shape_;
};

}  // namespace cdopt::detail
