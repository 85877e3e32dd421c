#include <cdopt/errors.hpp>
#include <cdopt/manifolds.hpp>

#include "manifolds/operators.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>

namespace cdopt {
namespace {

using detail::ColumnNormalizingOperator;
using detail::PolynomialOperator;
using detail::QuadraticConstraint;
using detail::ResidualShape;

using Sampler = std::function<Vector(Rng&)>;

class CatalogModel final : public ManifoldModel {
 public:
  using Operator = std::variant<ColumnNormalizingOperator, PolynomialOperator>;

  CatalogModel(ManifoldKind kind, QuadraticConstraint constraint, Operator op, Sampler sampler)
      : kind_(kind),
        constraint_(std::move(constraint)),
        op_(std::move(op)),
        sampler_(std::move(sampler)) {}

  ManifoldKind kind() const override { return kind_; }
  Index rows() const override { return constraint_.rows(); }
  Index cols() const override { return constraint_.cols(); }
  Index constraint_dim() const override { return constraint_.dim(); }

  Vector constraint(const Vector& x) const override { return constraint_.value(x); }
  Vector jac_apply(const Vector& x, const Vector& v) const override {
    return constraint_.jac_apply(x, v);
  }
  Vector jac_adjoint_apply(const Vector& x, const Vector& d) const override {
    return constraint_.jac_adjoint_apply(x, d);
  }
  Vector jac_diff_apply(const Vector& x, const Vector& d, const Vector& w) const override {
    return constraint_.jac_diff_apply(x, d, w);
  }

  Vector op_apply(const Vector& x) const override {
    return std::visit([&](const auto& op) { return op.apply(x); }, op_);
  }
  Vector op_diff(const Vector& x, const Vector& d) const override {
    return std::visit([&](const auto& op) { return op.diff(x, d); }, op_);
  }
  Vector op_adjoint_apply(const Vector& x, const Vector& v) const override {
    if (const auto* col = std::get_if<ColumnNormalizingOperator>(&op_)) return col->diff(x, v);
    return std::get<PolynomialOperator>(op_).adjoint(x, v);
  }
  Vector op_adjoint_diff_apply(const Vector& x, const Vector& d, const Vector& v) const override {
    return std::visit([&](const auto& op) { return op.adjoint_diff(x, d, v); }, op_);
  }

  bool has_sampler() const override { return static_cast<bool>(sampler_); }
  Vector sample_feasible(Rng& rng) const override { return sampler_(rng); }

 private:
  ManifoldKind kind_;
  QuadraticConstraint constraint_;
  Operator op_;
  Sampler sampler_;
};

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix G(rows, cols);
  // Fill column-major explicitly so the stream order is fixed.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

Matrix thin_q(const Matrix& A) {
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
}

/// (I - W/2)^{-1} (I + W/2); maps a quadratic Lie algebra into its group.
Matrix cayley(const Matrix& W) {
  const Index n = W.rows();
  const Matrix I = Matrix::Identity(n, n);
  return (I - 0.5 * W).partialPivLu().solve(I + 0.5 * W);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}

void require_symmetric(const Matrix& B, const char* name) {
  require(B.rows() == B.cols(), std::string(name) + " must be square");
  const double scale = std::max(1.0, B.norm());
  require((B - B.transpose()).norm() <= 1e-12 * scale, std::string(name) + " must be symmetric");
}

void require_proper(Index n, Index p) {
  require(p < n, "manifold constraint count p=" + std::to_string(p) +
                     " must be below the ambient dimension n=" + std::to_string(n));
}

ManifoldSpec make(ManifoldKind kind, QuadraticConstraint c, CatalogModel::Operator op,
                  Sampler sampler) {
  require_proper(c.rows() * c.cols(), c.dim());
  return ManifoldSpec(std::make_shared<const CatalogModel>(kind, std::move(c), std::move(op),
                                                           std::move(sampler)));
}

ManifoldSpec column_normalized(ManifoldKind kind, Index m, Index s) {
  require(m >= 1 && s >= 1, "dimensions must be positive");
  QuadraticConstraint c(m, s, std::nullopt, Matrix::Identity(s, s), ResidualShape::Diagonal);
  Sampler sampler = [m, s](Rng& rng) {
    Matrix X = gaussian(m, s, rng);
    X.colwise().normalize();
    return flatten(X);
  };
  return make(kind, std::move(c), ColumnNormalizingOperator(m, s), std::move(sampler));
}

ManifoldSpec stiefel_like(ManifoldKind kind, Index m, Index s) {
  require(m >= 1 && s >= 1 && s <= m, "Stiefel requires 1 <= s <= m");
  QuadraticConstraint c(m, s, std::nullopt, Matrix::Identity(s, s), ResidualShape::Symmetric);
  PolynomialOperator op(m, s, std::nullopt, std::nullopt, std::nullopt, -0.5);
  Sampler sampler = [m, s](Rng& rng) { return flatten(thin_q(gaussian(m, s, rng))); };
  return make(kind, std::move(c), std::move(op), std::move(sampler));
}

}  // namespace

SparseMatrix symplectic_form(Index m) {
  SparseMatrix Q(2 * m, 2 * m);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * m);
  for (Index i = 0; i < m; ++i) {
    t.emplace_back(i, m + i, 1.0);
    t.emplace_back(m + i, i, -1.0);
  }
  Q.setFromTriplets(t.begin(), t.end());
  return Q;
}

ManifoldSpec ManifoldSpec::sphere(Index n) {
  return column_normalized(ManifoldKind::Sphere, n, 1);
}

ManifoldSpec ManifoldSpec::oblique(Index m, Index s) {
  return column_normalized(ManifoldKind::Oblique, m, s);
}

ManifoldSpec ManifoldSpec::stiefel(Index m, Index s) {
  return stiefel_like(ManifoldKind::Stiefel, m, s);
}

ManifoldSpec ManifoldSpec::grassmann(Index m, Index s) {
  return stiefel_like(ManifoldKind::Grassmann, m, s);
}

ManifoldSpec ManifoldSpec::generalized_stiefel(const SparseMatrix& B, Index s) {
  const Matrix dense(B);
  require_symmetric(dense, "B");
  const Index m = dense.rows();
  require(s >= 1 && s <= m, "generalized Stiefel requires 1 <= s <= m");
  Eigen::LLT<Matrix> llt(dense);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(dense, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  require(llt.info() == Eigen::Success && min_eig > 0.0, "B must be positive definite");
  const Matrix L = llt.matrixL();
  QuadraticConstraint c(m, s, B, Matrix::Identity(s, s), ResidualShape::Symmetric);
  PolynomialOperator op(m, s, std::nullopt, B, std::nullopt, -0.5);
  // X = L^{-T} Q gives X^T B X = Q^T Q = I.
  Sampler sampler = [L, m, s](Rng& rng) {
    const Matrix Q = thin_q(gaussian(m, s, rng));
    return flatten(L.transpose().triangularView<Eigen::Upper>().solve(Q));
  };
  return make(ManifoldKind::GeneralizedStiefel, std::move(c), std::move(op), std::move(sampler));
}

ManifoldSpec ManifoldSpec::generalized_stiefel(const Matrix& B, Index s) {
  return generalized_stiefel(SparseMatrix(B.sparseView()), s);
}

ManifoldSpec ManifoldSpec::hyperbolic(const SparseMatrix& B, Index s) {
  const Matrix dense(B);
  require_symmetric(dense, "B");
  const Index m = dense.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense);
  const Vector& lambda = eig.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const Index n_pos = (lambda.array() > tol).count();
  const Index n_neg = (lambda.array() < -tol).count();
  require(n_pos > 0 && n_neg > 0, "hyperbolic B must have eigenvalues of both signs");
  require(s >= 1 && s <= n_pos, "hyperbolic s must not exceed the count of positive eigenvalues");

  QuadraticConstraint c(m, s, B, Matrix::Identity(s, s), ResidualShape::Symmetric);
  PolynomialOperator op(m, s, std::nullopt, B, std::nullopt, -0.5);

  // Draw Y mostly inside the positive eigenspace, then normalize by (Y^T B Y)^{-1/2}.
  const Matrix V = eig.eigenvectors();
  Sampler sampler = [V, lambda, dense, tol, m, s](Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Matrix G = gaussian(m, s, rng);
      for (Index i = 0; i < m; ++i) {
        if (lambda(i) > tol)
          G.row(i) /= std::sqrt(lambda(i));
        else
          G.row(i) *= 0.5 / std::sqrt(std::max(std::abs(lambda(i)), 1.0));
      }
      const Matrix Y = V * G;
      const Matrix S = Y.transpose() * dense * Y;
      Eigen::SelfAdjointEigenSolver<Matrix> se(S);
      if (se.eigenvalues().minCoeff() <= 1e-3 * se.eigenvalues().maxCoeff()) continue;
      const Matrix inv_sqrt = se.eigenvectors() *
                              se.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                              se.eigenvectors().transpose();
      return flatten(Y * inv_sqrt);
    }
    throw NumericalError("hyperbolic sampler failed to find a positive definite frame");
  };
  return make(ManifoldKind::Hyperbolic, std::move(c), std::move(op), std::move(sampler));
}

ManifoldSpec ManifoldSpec::hyperbolic(const Matrix& B, Index s) {
  return hyperbolic(SparseMatrix(B.sparseView()), s);
}

ManifoldSpec ManifoldSpec::symplectic_stiefel(Index m, Index s) {
  require(m >= 1 && s >= 1 && s <= m, "symplectic Stiefel requires 1 <= s <= m");
  const SparseMatrix Qm = symplectic_form(m);
  const SparseMatrix Qs = symplectic_form(s);
  QuadraticConstraint c(2 * m, 2 * s, Qm, Matrix(Qs), ResidualShape::Skew);
  PolynomialOperator op(2 * m, 2 * s, Qs, Qm, std::nullopt, 0.5);

  // Z = diag(P, P^{-T}) [I S1; 0 I] [I 0; S2 I] with P upper triangular and S1,
  // S2 symmetric is symplectic; keep the columns {0..s-1, m..m+s-1}, on which
  // Q_m restricts to Q_s.
  Sampler sampler = [m, s](Rng& rng) {
    const double scale = 1.0 / std::sqrt(double(m));
    std::normal_distribution<double> normal;
    Matrix P = Matrix::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < j; ++i) P(i, j) = scale * normal(rng);
      P(j, j) = std::exp(0.25 * normal(rng));
    }
    auto symmetric = [&] {
      const Matrix G = gaussian(m, m, rng);
      return Matrix(0.5 * scale * (G + G.transpose()));
    };
    const Matrix S1 = symmetric();
    const Matrix S2 = symmetric();
    const Matrix I = Matrix::Identity(m, m);
    const Matrix PinvT = P.transpose().triangularView<Eigen::Lower>().solve(I);

    // Columns of [I 0; S2 I] we keep, pushed through the shear and the block scaling.
    Matrix top(m, 2 * s), bottom(m, 2 * s);
    top << I.leftCols(s), Matrix::Zero(m, s);
    bottom << S2.leftCols(s), I.leftCols(s);
    top += S1 * bottom;
    Matrix X(2 * m, 2 * s);
    X.topRows(m) = P * top;
    X.bottomRows(m) = PinvT * bottom;
    return flatten(X);
  };
  return make(ManifoldKind::SymplecticStiefel, std::move(c), std::move(op), std::move(sampler));
}

ManifoldSpec ManifoldSpec::quadratic_lie_group(const SparseMatrix& R, int nu) {
  require(nu == 1 || nu == -1, "nu must be +1 or -1");
  const Matrix dense(R);
  require(dense.rows() == dense.cols(), "R must be square");
  const Index m = dense.rows();
  const Matrix I = Matrix::Identity(m, m);
  require((dense * dense - nu * I).norm() <= 1e-12 * m, "R must satisfy R^2 = nu I");
  require((dense.transpose() - nu * dense).norm() <= 1e-12 * m, "R must satisfy R^T = nu R");

  const auto shape = nu == 1 ? ResidualShape::Symmetric : ResidualShape::Skew;
  QuadraticConstraint c(m, m, R, dense, shape);
  // A(X) = X - 1/2 X (R^T X^T R X - I). With the factors ordered as
  // X^T R^T X R instead, c(A(X)) keeps a first-order term unless R = +-I.
  const SparseMatrix Rt = R.transpose();
  PolynomialOperator op(m, m, Rt, R, std::nullopt, -0.5);

  // Lie algebra {W : W^T R + R W = 0} = {R S : S skew (nu=+1) / symmetric (nu=-1)}.
  Sampler sampler = [dense, m, nu](Rng& rng) {
    const Matrix G = gaussian(m, m, rng);
    const Matrix S = (G - nu * G.transpose()) / (2.0 * std::sqrt(double(m)));
    return flatten(cayley(dense * S));
  };
  return make(ManifoldKind::QuadraticLieGroup, std::move(c), std::move(op), std::move(sampler));
}

ManifoldSpec ManifoldSpec::quadratic_lie_group(const Matrix& R, int nu) {
  return quadratic_lie_group(SparseMatrix(R.sparseView()), nu);
}

ManifoldSpec ManifoldSpec::quadratic_lie_group(Index m, int nu) {
  require(m >= 2, "Lie group dimension must be at least 2");
  if (nu == -1) {
    require(m % 2 == 0, "nu = -1 requires even m");
    return quadratic_lie_group(symplectic_form(m / 2), -1);
  }
  Vector diag = Vector::Ones(m);
  diag.tail(m / 2).setConstant(-1.0);
  return quadratic_lie_group(Matrix(diag.asDiagonal()), nu);
}

}  // namespace cdopt
