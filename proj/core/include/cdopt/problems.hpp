#pragma once

#include <cdopt/manifolds.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace cdopt {

struct ProblemInstance {
  std::string name;
  ManifoldSpec spec;
  Objective objective;
  std::optional<double> known_optimum;
  std::uint64_t seed = 0;
  /// Feasible starting point drawn from the manifold sampler.
  Vector initial_point;
};

/// min 1/2 |X - W|^2 over the symplectic Stiefel manifold in R^{2m x 2s};
/// W is standard Gaussian scaled to unit norm.
ProblemInstance nsm_problem(Index m, Index s, std::uint64_t seed);

struct GenEigData {
  SparseMatrix A;
  SparseMatrix B;
};

/// Symmetric sparse A, B with the given density, scaled to unit spectral norm;
/// B is then shifted by 1.1 I.
GenEigData geneig_matrices(Index m, double density, std::uint64_t seed);

/// min -1/2 tr(X^T A X) s.t. X^T B X = I_s.
ProblemInstance geneig_problem(Index m, Index s, double density, std::uint64_t seed);
ProblemInstance geneig_problem(const GenEigData& data, Index s, std::uint64_t seed);

/// Sum of the s largest eigenvalues of the symmetric-definite pencil (A, B),
/// by Cholesky reduction to a standard eigenproblem. Requires m <= 400.
double geneig_dense_oracle(const Matrix& A, const Matrix& B, Index s);

struct NcmData {
  Matrix G;
  Matrix H;
};

/// G = (1 - theta) G0 + theta E with G0 a normalized rank-min(m, 2s) Gram matrix,
/// E symmetric with unit diagonal, H symmetric uniform on [0, 1].
NcmData ncm_data(Index m, Index s, double theta, std::uint64_t seed);

/// min 1/2 |H o (X X^T - G)|_F^2 s.t. Diag(X X^T) = I. The variable is stored
/// transposed (Y = X^T, s x m with unit columns) on the oblique manifold.
ProblemInstance ncm_problem(Index m, Index s, double theta, std::uint64_t seed);
ProblemInstance ncm_problem(const Matrix& G, const Matrix& H, Index s, std::uint64_t seed);

/// Reads "m" followed by m rows of m whitespace-separated reals.
Matrix read_dense_matrix(std::istream& in);
Matrix load_dense_matrix(const std::string& path);

/// min |w - [1, 1]|^2 s.t. w^T diag(1, -1) w = 1.
ProblemInstance hyperbola2d_problem();

}  // namespace cdopt
