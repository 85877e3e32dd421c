#include "manifolds/quadratic_constraint.hpp"

namespace cdopt::detail {

Matrix left(const std::optional<SparseMatrix>& M, const Matrix& X) {
  return M ? Matrix(*M * X) : X;
}
Matrix left_t(const std::optional<SparseMatrix>& M, const Matrix& X) {
  return M ? Matrix(M->transpose() * X) : X;
}
Matrix right(const Matrix& X, const std::optional<SparseMatrix>& M) {
  return M ? Matrix(X * *M) : X;
}
Matrix right_t(const Matrix& X, const std::optional<SparseMatrix>& M) {
  return M ? Matrix(X * M->transpose()) : X;
}

QuadraticConstraint::QuadraticConstraint(Index rows, Index cols, std::optional<SparseMatrix> M,
                                         Matrix K, ResidualShape shape)
    : rows_(rows), cols_(cols), M_(std::move(M)), K_(std::move(K)), shape_(shape) {}

Vector QuadraticConstraint::value(const Vector& x) const {
  const auto X = as_matrix(x, rows_, cols_);
  const Matrix S = X.transpose() * left(M_, X) - K_;
  return pack(S, shape_);
}

// grad_X <V, X^T M X> = M X V^T + M^T X V
Vector QuadraticConstraint::jac_apply(const Vector& x, const Vector& v) const {
  const auto X = as_matrix(x, rows_, cols_);
  const Matrix V = unpack_dual(v, shape_, cols_);
  const Matrix out = left(M_, X * V.transpose()) + left_t(M_, X * V);
  return flatten(out);
}

Vector QuadraticConstraint::jac_adjoint_apply(const Vector& x, const Vector& d) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto D = as_matrix(d, rows_, cols_);
  const Matrix S = D.transpose() * left(M_, X) + X.transpose() * left(M_, D);
  return pack(S, shape_);
}

Vector QuadraticConstraint::jac_diff_apply(const Vector&, const Vector& d, const Vector& w) const {
  const auto D = as_matrix(d, rows_, cols_);
  const Matrix W = unpack_dual(w, shape_, cols_);
  const Matrix out = left(M_, D * W.transpose()) + left_t(M_, D * W);
  return flatten(out);
}

}  // namespace cdopt::detail
