#include <cdopt/errors.hpp>
#include <cdopt/manifolds.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <array>
#include <string>

namespace cdopt {
namespace {

constexpr std::array<std::pair<ManifoldKind, std::string_view>, 9> kKindNames{{
    {ManifoldKind::Sphere, "sphere"},
    {ManifoldKind::Oblique, "oblique"},
    {ManifoldKind::Stiefel, "stiefel"},
    {ManifoldKind::GeneralizedStiefel, "generalized_stiefel"},
    {ManifoldKind::Grassmann, "grassmann"},
    {ManifoldKind::Hyperbolic, "hyperbolic"},
    {ManifoldKind::SymplecticStiefel, "symplectic"},
    {ManifoldKind::QuadraticLieGroup, "lie_group"},
    {ManifoldKind::Generic, "generic"},
}};

void check_point(const ManifoldSpec& spec, const Vector& x, const char* what) {
  if (x.size() != spec.dim())
    throw ArgumentError(std::string(what) + ": expected length " + std::to_string(spec.dim()) +
                        ", got " + std::to_string(x.size()));
}

void check_multiplier(const ManifoldSpec& spec, const Vector& v, const char* what) {
  if (v.size() != spec.constraint_dim())
    throw ArgumentError(std::string(what) + ": expected length " +
                        std::to_string(spec.constraint_dim()) + ", got " +
                        std::to_string(v.size()));
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ManifoldKind> parse_manifold_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

ManifoldSpec::ManifoldSpec(std::shared_ptr<const ManifoldModel> model) : model_(std::move(model)) {
  if (!model_) throw ArgumentError("ManifoldSpec requires a model");
}

Vector constraint_eval(const ManifoldSpec& spec, const Vector& x) {
  check_point(spec, x, "constraint_eval x");
  return spec.model().constraint(x);
}

Vector constraint_jac_apply(const ManifoldSpec& spec, const Vector& x, const Vector& v) {
  check_point(spec, x, "constraint_jac_apply x");
  check_multiplier(spec, v, "constraint_jac_apply v");
  return spec.model().jac_apply(x, v);
}

Vector constraint_jac_adjoint_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d) {
  check_point(spec, x, "constraint_jac_adjoint_apply x");
  check_point(spec, d, "constraint_jac_adjoint_apply d");
  return spec.model().jac_adjoint_apply(x, d);
}

Vector constraint_jac_diff_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d,
                                 const Vector& w) {
  check_point(spec, x, "constraint_jac_diff_apply x");
  check_point(spec, d, "constraint_jac_diff_apply d");
  check_multiplier(spec, w, "constraint_jac_diff_apply w");
  return spec.model().jac_diff_apply(x, d, w);
}

Vector operator_apply(const ManifoldSpec& spec, const Vector& x) {
  check_point(spec, x, "operator_apply x");
  return spec.model().op_apply(x);
}

Vector operator_diff(const ManifoldSpec& spec, const Vector& x, const Vector& d) {
  check_point(spec, x, "operator_diff x");
  check_point(spec, d, "operator_diff d");
  return spec.model().op_diff(x, d);
}

Vector operator_adjoint_apply(const ManifoldSpec& spec, const Vector& x, const Vector& v) {
  check_point(spec, x, "operator_adjoint_apply x");
  check_point(spec, v, "operator_adjoint_apply v");
  return spec.model().op_adjoint_apply(x, v);
}

Vector operator_adjoint_diff_apply(const ManifoldSpec& spec, const Vector& x, const Vector& d,
                                   const Vector& v) {
  check_point(spec, x, "operator_adjoint_diff_apply x");
  check_point(spec, d, "operator_adjoint_diff_apply d");
  check_point(spec, v, "operator_adjoint_diff_apply v");
  return spec.model().op_adjoint_diff_apply(x, d, v);
}

Matrix constraint_jacobian(const ManifoldSpec& spec, const Vector& x) {
  check_point(spec, x, "constraint_jacobian x");
  const Index p = spec.constraint_dim();
  Matrix J(spec.dim(), p);
  Vector e = Vector::Zero(p);
  for (Index i = 0; i < p; ++i) {
    e(i) = 1.0;
    J.col(i) = spec.model().jac_apply(x, e);
    e(i) = 0.0;
  }
  return J;
}

Matrix tangent_basis(const ManifoldSpec& spec, const Vector& x) {
  if (!is_feasible(spec, x))
    throw ArgumentError("tangent_basis requires a feasible point, |c(x)| = " +
                        std::to_string(feasibility(spec, x)));
  const Matrix J = constraint_jacobian(spec, x);
  const Index n = J.rows();
  const Index p = J.cols();
  const Vector sigma = Eigen::JacobiSVD<Matrix>(J).singularValues();
  const double sigma_min = sigma(p - 1);
  if (!(sigma_min > 1e-10 * std::max(1.0, sigma(0))))
    throw DegeneracyError("constraint Jacobian is rank deficient (LICQ fails), sigma_min = " +
                              std::to_string(sigma_min),
                          sigma_min);
  Eigen::HouseholderQR<Matrix> qr(J);
  const Matrix Q = qr.householderQ();
  return Q.rightCols(n - p);
}

double feasibility(const ManifoldSpec& spec, const Vector& x) {
  return constraint_eval(spec, x).norm();
}

double feasibility_tolerance(const Vector& x) { return 1e-8 * (1.0 + x.norm()); }

bool is_feasible(const ManifoldSpec& spec, const Vector& x) {
  return feasibility(spec, x) <= feasibility_tolerance(x);
}

bool has_sampler(const ManifoldSpec& spec) { return spec.model().has_sampler(); }

Vector sample_feasible(const ManifoldSpec& spec, Rng& rng) {
  if (!spec.model().has_sampler())
    throw CapabilityError(std::string("no feasible sampler for kind ") +
                          std::string(to_string(spec.kind())));
  return spec.model().sample_feasible(rng);
}

}  // namespace cdopt
