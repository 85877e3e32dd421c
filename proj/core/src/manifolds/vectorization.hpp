#pragma once

#include <cdopt/types.hpp>

namespace cdopt::detail {

/// Which half of a k x k residual matrix carries the independent constraints.
enum class ResidualShape {
  Symmetric,  // upper triangle incl. diagonal, k(k+1)/2 entries
  Skew,       // strict upper triangle, k(k-1)/2 entries
  Diagonal,   // diagonal, k entries
};

Index packed_size(ResidualShape shape, Index k);

/// Packs the independent entries of S column by column.
Vector pack(const Matrix& S, ResidualShape shape);

/// Dual of `pack`: the k x k matrix V with <V, S>_F = <v, pack(S)> for every
/// S of the given symmetry class. V is symmetric, strictly upper, or diagonal.
Matrix unpack_dual(const Vector& v, ResidualShape shape, Index k);

}  // namespace cdopt::detail
