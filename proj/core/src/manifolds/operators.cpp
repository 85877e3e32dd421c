#include "manifolds/operators.hpp"

namespace cdopt::detail {

Vector ColumnNormalizingOperator::apply(const Vector& x) const {
  const auto X = as_matrix(x, rows_, cols_);
  Matrix out(rows_, cols_);
  for (Index j = 0; j < cols_; ++j) {
    const double r = X.col(j).squaredNorm();
    out.col(j) = 2.0 * X.col(j) / (1.0 + r);
  }
  return flatten(out);
}

Vector ColumnNormalizingOperator::diff(const Vector& x, const Vector& d) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto D = as_matrix(d, rows_, cols_);
  Matrix out(rows_, cols_);
  for (Index j = 0; j < cols_; ++j) {
    const double q = 1.0 + X.col(j).squaredNorm();
    const double xd = X.col(j).dot(D.col(j));
    out.col(j) = 2.0 * D.col(j) / q - 4.0 * xd / (q * q) * X.col(j);
  }
  return flatten(out);
}

Vector ColumnNormalizingOperator::adjoint_diff(const Vector& x, const Vector& d,
                                               const Vector& v) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto D = as_matrix(d, rows_, cols_);
  const auto V = as_matrix(v, rows_, cols_);
  Matrix out(rows_, cols_);
  for (Index j = 0; j < cols_; ++j) {
    const double q = 1.0 + X.col(j).squaredNorm();
    const double q2 = q * q;
    const double xd = X.col(j).dot(D.col(j));
    const double xv = X.col(j).dot(V.col(j));
    const double dv = D.col(j).dot(V.col(j));
    out.col(j) = -4.0 * xd / q2 * V.col(j) - 4.0 * xv / q2 * D.col(j) +
                 (16.0 * xv * xd / (q2 * q) - 4.0 * dv / q2) * X.col(j);
  }
  return flatten(out);
}

PolynomialOperator::PolynomialOperator(Index rows, Index cols, std::optional<SparseMatrix> L,
                                       std::optional<SparseMatrix> M,
                                       std::optional<SparseMatrix> N, double a)
    : rows_(rows), cols_(cols), L_(std::move(L)), M_(std::move(M)), N_(std::move(N)), a_(a) {}

Vector PolynomialOperator::apply(const Vector& x) const {
  const auto X = as_matrix(x, rows_, cols_);
  const Matrix G = X.transpose() * left(M_, X);
  const Matrix out = 1.5 * X + a_ * right(right(X, L_) * G, N_);
  return flatten(out);
}

// DA[D] = 3/2 D + a (D L G N + X L (D^T M X + X^T M D) N)
Vector PolynomialOperator::diff(const Vector& x, const Vector& d) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto D = as_matrix(d, rows_, cols_);
  const Matrix MX = left(M_, X);
  const Matrix G = X.transpose() * MX;
  const Matrix dG = D.transpose() * MX + X.transpose() * left(M_, D);
  const Matrix out = 1.5 * D + a_ * right(right(D, L_) * G + right(X, L_) * dG, N_);
  return flatten(out);
}

// J_A V = 3/2 V + a (V N^T G^T L^T + M X N V^T X L + M^T X L^T X^T V N^T)
Vector PolynomialOperator::adjoint(const Vector& x, const Vector& v) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto V = as_matrix(v, rows_, cols_);
  const Matrix G = X.transpose() * left(M_, X);
  const Matrix VNt = right_t(V, N_);
  const Matrix XN = right(X, N_);
  Matrix out = 1.5 * V;
  out += a_ * right_t(VNt * G.transpose(), L_);
  out += a_ * left(M_, XN * V.transpose() * right(X, L_));
  out += a_ * left_t(M_, right_t(X, L_) * (X.transpose() * VNt));
  return flatten(out);
}

Vector PolynomialOperator::adjoint_diff(const Vector& x, const Vector& d, const Vector& v) const {
  const auto X = as_matrix(x, rows_, cols_);
  const auto D = as_matrix(d, rows_, cols_);
  const auto V = as_matrix(v, rows_, cols_);
  const Matrix VNt = right_t(V, N_);
  const Matrix dGt = X.transpose() * left_t(M_, D) + D.transpose() * left_t(M_, X);
  Matrix out = right_t(VNt * dGt, L_);
  out += left(M_, right(D, N_) * V.transpose() * right(X, L_));
  out += left(M_, right(X, N_) * V.transpose() * right(D, L_));
  out += left_t(M_, right_t(D, L_) * (X.transpose() * VNt));
  out += left_t(M_, right_t(X, L_) * (D.transpose() * VNt));
  return flatten(a_ * out);
}

}  // namespace cdopt::detail
