#include "manifolds/vectorization.hpp"

namespace cdopt::detail {

Index packed_size(ResidualShape shape, Index k) {
  switch (shape) {
    case ResidualShape::Symmetric: return k * (k + 1) / 2;
    case ResidualShape::Skew: return k * (k - 1) / 2;
    case ResidualShape::Diagonal: return k;
  }
  return 0;
}

Vector pack(const Matrix& S, ResidualShape shape) {
  const Index k = S.cols();
  Vector out(packed_size(shape, k));
  Index pos = 0;
  switch (shape) {
    case ResidualShape::Symmetric:
      for (Index j = 0; j < k; ++j)
        for (Index i = 0; i <= j; ++i) out(pos++) = S(i, j);
      break;
    case ResidualShape::Skew:
      for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < j; ++i) out(pos++) = S(i, j);
      break;
    case ResidualShape::Diagonal:
      out = S.diagonal();
      break;
  }
  return out;
}

Matrix unpack_dual(const Vector& v, ResidualShape shape, Index k) {
  Matrix V = Matrix::Zero(k, k);
  Index pos = 0;
  switch (shape) {
    case ResidualShape::Symmetric:
      for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < j; ++i) {
          V(i, j) = 0.5 * v(pos);
          V(j, i) = 0.5 * v(pos);
          ++pos;
        }
        V(j, j) = v(pos++);
      }
      break;
    case ResidualShape::Skew:
      for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < j; ++i) V(i, j) = v(pos++);
      break;
    case ResidualShape::Diagonal:
      V.diagonal() = v;
      break;
  }
  return V;
}

}  // namespace cdopt::detail
