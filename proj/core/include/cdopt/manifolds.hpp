#pragma once

#include <cdopt/types.hpp>

#include <memory>
#include <optional>
#include <string_view>

namespace cdopt {

enum class ManifoldKind {
  Sphere,
  Oblique,
  Stiefel,
  GeneralizedStiefel,
  Grassmann,
  Hyperbolic,
  SymplecticStiefel,
  QuadraticLieGroup,
  Generic,
};

std::string_view to_string(ManifoldKind kind);
std::optional<ManifoldKind> parse_manifold_kind(std::string_view name);

/// User-supplied constraint map for the Generic kind.
///
/// `jac_apply(x, v)` is J_c(x) v (R^p -> R^n), `jac_adjoint_apply(x, d)` is
/// J_c(x)^T d (R^n -> R^p). `jac_diff_apply(x, d, w)` is the d-directional
/// derivative of x -> J_c(x) w; when absent it is replaced by a central
/// finite difference of `jac_apply`. `sampler` draws feasible points and is
/// only needed by the verification checks.
struct GenericConstraint {
  Index dim = 0;
  std::function<Vector(const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&)> jac_apply;
  std::function<Vector(const Vector&, const Vector&)> jac_adjoint_apply;
  std::function<Vector(const Vector&, const Vector&, const Vector&)> jac_diff_apply;
  std::function<Vector(Rng&)> sampler;
};

/// Constraint map c and constraint dissolving operator A for one manifold.
///
/// Every method takes flat column-major points of length `dim()`; shapes are
/// validated by the free functions below, not here.
class ManifoldModel {
 public:
  virtual ~ManifoldModel() = default;

  virtual ManifoldKind kind() const = 0;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Index constraint_dim() const = 0;

  virtual Vector constraint(const Vector& x) const = 0;
  virtual Vector jac_apply(const Vector& x, const Vector& v) const = 0;
  virtual Vector jac_adjoint_apply(const Vector& x, const Vector& d) const = 0;
  virtual Vector jac_diff_apply(const Vector& x, const Vector& d, const Vector& w) const = 0;

  virtual Vector op_apply(const Vector& x) const = 0;
  virtual Vector op_diff(const Vector& x, const Vector& d) const = 0;
  virtual Vector op_adjoint_apply(const Vector& x, const Vector& v) const = 0;
  virtual Vector op_adjoint_diff_apply(const Vector& x, const Vector& d, const Vector& v) const = 0;

  virtual bool has_sampler() const = 0;
  virtual Vector sample_feasible(Rng& rng) const = 0;
};

/// Value-semantic handle to an immutable ManifoldModel.
class ManifoldSpec {
 public:
  explicit ManifoldSpec(std::shared_ptr<const ManifoldModel> model);

  static ManifoldSpec sphere(Index n);
  /// Unit-norm columns: Diag(X^T X) = I.
  static ManifoldSpec oblique(Index m, Index s);
  static ManifoldSpec stiefel(Index m, Index s);
  /// Same operator as Stiefel; objectives must be invariant under X -> XQ.
  static ManifoldSpec grassmann(Index m, Index s);
  /// X^T B X = I with B symmetric positive definite.
  static ManifoldSpec generalized_stiefel(const SparseMatrix& B, Index s);
  static ManifoldSpec generalized_stiefel(const Matrix& B, Index s);
  /// X^T B X = I with B symmetric and indefinite.
  static ManifoldSpec hyperbolic(const SparseMatrix& B, Index s);
  static ManifoldSpec hyperbolic(const Matrix& B, Index s);
  /// X in R^{2m x 2s} with X^T Q_m X = Q_s.
  static ManifoldSpec symplectic_stiefel(Index m, Index s);
  /// X^T R X = R with R^2 = nu I, R^T = nu R.
  static ManifoldSpec quadratic_lie_group(const SparseMatrix& R, int nu);
  static ManifoldSpec quadratic_lie_group(const Matrix& R, int nu);
  /// Convenience: R = diag(I_{m-q}, -I_q) for nu = +1, R = Q_{m/2} for nu = -1.
  static ManifoldSpec quadratic_lie_group(Index m, int nu);
  /// Regularized least-squares operator x - J (J^T J + alpha |c|^2 I)^{-1} c.
  static ManifoldSpec generic(Index rows, Index cols, GenericConstraint constraint,
                              double alpha = 1.0);

  ManifoldKind kind() const { return model_->kind(); }
  Index rows() const { return model_->rows(); }
  Index cols() const { return model_->cols(); }
  Index dim() const { return model_->rows() * model_->cols(); }
  Index constraint_dim() const { return model_->constraint_dim(); }
  const ManifoldModel& model() const { return *model_; }

 private:
  std::shared_ptr<const ManifoldModel> model_;
};

/// Symplectic structure matrix [[0, I_m], [-I_m, 0]].
SparseMatrix symplectic_form(Index m);

Vector constraint_eval(const ManifoldSpec& spec, const Vector& x);
/// J_c(x) v, length n.
Vector constraint_jac_apply(const ManifoldSpec& spec, const Vector& x, const Vector& v);
/// J_c(x)^T d, the directional derivative of c along d; length p.
Vector constraint_jac_adjoint_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d);
/// (D J_c(x)[d]) w, length n.
Vector constraint_jac_diff_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d,
                                 const Vector& w);

Vector operator_apply(const ManifoldSpec& spec, const Vector& x);
/// DA(x)[d].
Vector operator_diff(const ManifoldSpec& spec, const Vector& x, const Vector& d);
/// J_A(x) v, the adjoint of DA(x).
Vector operator_adjoint_apply(const ManifoldSpec& spec, const Vector& x, const Vector& v);
/// d-directional derivative of x -> J_A(x) v with v fixed.
Vector operator_adjoint_diff_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d,
                                   const Vector& v);

/// Dense n x p matrix J_c(x).
Matrix constraint_jacobian(const ManifoldSpec& spec, const Vector& x);

/// Orthonormal basis of Null(J_c(x)^T). Throws DegeneracyError when LICQ fails.
Matrix tangent_basis(const ManifoldSpec& spec, const Vector& x);

/// Euclidean norm of c(x).
double feasibility(const ManifoldSpec& spec, const Vector& x);

/// |c(x)| <= 1e-8 (1 + |x|).
bool is_feasible(const ManifoldSpec& spec, const Vector& x);
double feasibility_tolerance(const Vector& x);

bool has_sampler(const ManifoldSpec& spec);
/// Draws a feasible point. Throws CapabilityError when the spec has no sampler.
Vector sample_feasible(const ManifoldSpec& spec, Rng& rng);

}  // namespace cdopt
