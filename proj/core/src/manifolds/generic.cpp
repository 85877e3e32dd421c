#include <cdopt/errors.hpp>
#include <cdopt/manifolds.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace cdopt {
namespace {

double second_order_step(const Vector& x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
}

/// x - J (J^T J + alpha |c|^2 I)^{-1} c built purely from the constraint contracts.
class GenericModel final : public ManifoldModel {
 public:
  GenericModel(Index rows, Index cols, GenericConstraint c, double alpha)
      : rows_(rows), cols_(cols), c_(std::move(c)), alpha_(alpha) {}

  ManifoldKind kind() const override { return ManifoldKind::Generic; }
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Index constraint_dim() const override { return c_.dim; }

  Vector constraint(const Vector& x) const override { return c_.value(x); }
  Vector jac_apply(const Vector& x, const Vector& v) const override { return c_.jac_apply(x, v); }
  Vector jac_adjoint_apply(const Vector& x, const Vector& d) const override {
    return c_.jac_adjoint_apply(x, d);
  }

  Vector jac_diff_apply(const Vector& x, const Vector& d, const Vector& w) const override {
    if (c_.jac_diff_apply) return c_.jac_diff_apply(x, d, w);
    const double dn = d.norm();
    if (dn == 0.0) return Vector::Zero(x.size());
    const double h = second_order_step(x);
    const Vector u = d / dn;
    return (c_.jac_apply(x + h * u, w) - c_.jac_apply(x - h * u, w)) * (dn / (2.0 * h));
  }

  Vector op_apply(const Vector& x) const override {
    const State s = state(x);
    return x - s.J * s.y;
  }

  // DA[d] = d - DJ[d] y - J M^{-1} (J^T d - DJ[d]^T J y - J^T DJ[d] y - 2 alpha (c^T J^T d) y)
  Vector op_diff(const Vector& x, const Vector& d) const override {
    const State s = state(x);
    const Vector Jy = s.J * s.y;
    const Vector dJy = jac_diff_apply(x, d, s.y);
    Vector rhs = s.J.transpose() * d - second_form(x, d, Jy) - s.J.transpose() * dJy -
                 2.0 * s.alpha * s.c.dot(s.J.transpose() * d) * s.y;
    return d - dJy - s.J * s.solver.solve(rhs);
  }

  // J_A v = v - J z + DJ2(Jz - v, y) + DJ2(Jy, z) + 2 alpha (y^T z) J c, z = M^{-1} J^T v
  Vector op_adjoint_apply(const Vector& x, const Vector& v) const override {
    const State s = state(x);
    const Vector z = s.solver.solve(s.J.transpose() * v);
    const Vector Jz = s.J * z;
    const Vector Jy = s.J * s.y;
    return v - Jz + jac_diff_apply(x, Jz - v, s.y) + jac_diff_apply(x, Jy, z) +
           2.0 * s.alpha * s.y.dot(z) * (s.J * s.c);
  }

  Vector op_adjoint_diff_apply(const Vector& x, const Vector& d, const Vector& v) const override {
    const double dn = d.norm();
    if (dn == 0.0 || v.norm() == 0.0) return Vector::Zero(x.size());
    const double h = second_order_step(x);
    const Vector u = d / dn;
    return (op_adjoint_apply(x + h * u, v) - op_adjoint_apply(x - h * u, v)) * (dn / (2.0 * h));
  }

  bool has_sampler() const override { return static_cast<bool>(c_.sampler); }
  Vector sample_feasible(Rng& rng) const override {
    if (!c_.sampler) throw CapabilityError("generic manifold has no feasible sampler");
    return c_.sampler(rng);
  }

 private:
  struct State {
    Vector c;
    Matrix J;
    Eigen::LLT<Matrix> solver;
    double alpha;
    Vector y;
  };

  State state(const Vector& x) const {
    State s;
    s.c = c_.value(x);
    const Index p = c_.dim;
    s.J.resize(x.size(), p);
    Vector e = Vector::Zero(p);
    for (Index i = 0; i < p; ++i) {
      e(i) = 1.0;
      s.J.col(i) = c_.jac_apply(x, e);
      e(i) = 0.0;
    }
    const Matrix gram = s.J.transpose() * s.J;
    s.alpha = alpha_;
    for (int attempt = 0; attempt < 2; ++attempt) {
      Matrix M = gram;
      M.diagonal().array() += s.alpha * s.c.squaredNorm();
      s.solver.compute(M);
      if (s.solver.info() == Eigen::Success) {
        s.y = s.solver.solve(s.c);
        return s;
      }
      s.alpha *= 2.0;
    }
    throw NumericalError("generic operator: regularized Gram system is not positive definite");
  }

  /// (DJ[d]^T u)_i = d^T (Hess c_i) u.
  Vector second_form(const Vector& x, const Vector& d, const Vector& u) const {
    const Index p = c_.dim;
    Vector out(p);
    Vector e = Vector::Zero(p);
    for (Index i = 0; i < p; ++i) {
      e(i) = 1.0;
      out(i) = jac_diff_apply(x, d, e).dot(u);
      e(i) = 0.0;
    }
    return out;
  }

  Index rows_;
  Index cols_;
  GenericConstraint c_;
  double alpha_;
};

}  // namespace

ManifoldSpec ManifoldSpec::generic(Index rows, Index cols, GenericConstraint constraint,
                                   double alpha) {
  if (rows < 1 || cols < 1) throw ArgumentError("dimensions must be positive");
  if (!(alpha > 0.0)) throw ArgumentError("generic regularizer alpha must be positive");
  if (!constraint.value || !constraint.jac_apply || !constraint.jac_adjoint_apply)
    throw ArgumentError("generic constraint needs value, jac_apply and jac_adjoint_apply");
  if (constraint.dim < 1 || constraint.dim >= rows * cols)
    throw ArgumentError("generic constraint dimension must satisfy 1 <= p < n");
  return ManifoldSpec(std::make_shared<const GenericModel>(rows, cols, std::move(constraint), alpha));
}

}  // namespace cdopt
