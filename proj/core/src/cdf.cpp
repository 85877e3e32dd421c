#include <cdopt/cdf.hpp>
#include <cdopt/errors.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace cdopt {

CdfInstance::CdfInstance(ManifoldSpec spec, Objective objective, double beta, HessianMode mode)
    : spec_(std::move(spec)), objective_(std::move(objective)), beta_(beta), mode_(mode) {
  if (!(beta_ > 0.0)) throw ArgumentError("penalty parameter beta must be positive");
  if (!objective_.value || !objective_.gradient)
    throw ArgumentError("objective needs value and gradient contracts");
}

bool CdfInstance::has_hessian() const {
  return objective_.has_hessian() || mode_ == HessianMode::FiniteDifference;
}

CdfInstance CdfInstance::with_beta(double beta) const {
  return CdfInstance(spec_, objective_, beta, mode_);
}

double cdf_value(const CdfInstance& inst, const Vector& x) {
  const Vector a = operator_apply(inst.spec(), x);
  const Vector c = constraint_eval(inst.spec(), x);
  return inst.objective().value(a) + 0.5 * inst.beta() * c.squaredNorm();
}

std::pair<double, Vector> cdf_value_grad(const CdfInstance& inst, const Vector& x) {
  const ManifoldSpec& spec = inst.spec();
  const Vector a = operator_apply(spec, x);
  const Vector c = constraint_eval(spec, x);
  const double value = inst.objective().value(a) + 0.5 * inst.beta() * c.squaredNorm();
  Vector grad = operator_adjoint_apply(spec, x, inst.objective().gradient(a));
  grad += inst.beta() * constraint_jac_apply(spec, x, c);
  return {value, std::move(grad)};
}

Vector cdf_grad(const CdfInstance& inst, const Vector& x) { return cdf_value_grad(inst, x).second; }

Vector cdf_hess_vec(const CdfInstance& inst, const Vector& x, const Vector& d) {
  const ManifoldSpec& spec = inst.spec();
  const Objective& f = inst.objective();
  if (!f.has_hessian()) {
    if (inst.hessian_mode() != HessianMode::FiniteDifference)
      throw CapabilityError("objective has no hess_vec; request HessianMode::FiniteDifference");
    const double dn = d.norm();
    if (dn == 0.0) return Vector::Zero(x.size());
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
    const Vector u = d / dn;
    return (cdf_grad(inst, x + h * u) - cdf_grad(inst, x - h * u)) * (dn / (2.0 * h));
  }
  if (d.size() != x.size()) throw ArgumentError("cdf_hess_vec: direction length mismatch");

  const Vector a = operator_apply(spec, x);
  const Vector c = constraint_eval(spec, x);
  Vector out = operator_adjoint_apply(spec, x, f.hess_vec(a, operator_diff(spec, x, d)));
  out += operator_adjoint_diff_apply(spec, x, d, f.gradient(a));
  out += inst.beta() * (constraint_jac_apply(spec, x, constraint_jac_adjoint_apply(spec, x, d)) +
                        constraint_jac_diff_apply(spec, x, d, c));
  return out;
}

Objective cdf_objective(const CdfInstance& inst) {
  Objective obj;
  obj.value = [inst](const Vector& x) { return cdf_value(inst, x); };
  obj.gradient = [inst](const Vector& x) { return cdf_grad(inst, x); };
  if (inst.has_hessian())
    obj.hess_vec = [inst](const Vector& x, const Vector& d) { return cdf_hess_vec(inst, x, d); };
  return obj;
}

void PenaltyConfig::validate() const {
  if (n_samples < 1) throw ArgumentError("penalty n_samples must be positive");
  if (!(radius > 0.0)) throw ArgumentError("penalty radius must be positive");
  if (!(safety >= 1.0)) throw ArgumentError("penalty safety factor must be >= 1");
  if (!(floor >= 0.0)) throw ArgumentError("penalty floor must be >= 0");
}

std::vector<Vector> sample_ball(const Vector& center, double radius, int count, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Index n = center.size();
  std::vector<Vector> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vector dir(n);
    for (Index k = 0; k < n; ++k) dir(k) = normal(rng);
    dir.normalize();
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
    out.push_back(center + r * dir);
  }
  return out;
}

double estimate_beta_from_samples(const ManifoldSpec& spec, const Objective& objective,
                                  const std::vector<Vector>& samples, const PenaltyConfig& cfg) {
  cfg.validate();
  double worst = 0.0;
  for (const Vector& xi : samples) {
    const Vector a1 = operator_apply(spec, xi);
    const Vector a2 = operator_apply(spec, a1);
    const double num = objective.value(a2) - objective.value(a1);
    const double den = std::abs(constraint_eval(spec, xi).squaredNorm() -
                                constraint_eval(spec, a1).squaredNorm()) +
                       cfg.floor;
    worst = std::max(worst, std::max(num / den, 0.0));
  }
  return 2.0 * cfg.safety * worst;
}

double estimate_beta(const ManifoldSpec& spec, const Objective& objective, const Vector& x_ref,
                     const PenaltyConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!is_feasible(spec, x_ref))
    throw ArgumentError("estimate_beta requires a feasible reference point");
  const auto samples = sample_ball(x_ref, cfg.radius, cfg.n_samples, rng);
  return estimate_beta_from_samples(spec, objective, samples, cfg);
}

PostProcessResult post_process(const ManifoldSpec& spec, const Vector& x, double eps_f, int k_max) {
  if (!(eps_f > 0.0)) throw ArgumentError("post_process tolerance must be positive");
  PostProcessResult out{x, 0, {feasibility(spec, x)}};
  int increases = 0;
  while (out.residual_trace.back() > eps_f) {
    if (out.iterations >= k_max)
      throw NonConvergenceError("post_process: feasibility " +
                                    std::to_string(out.residual_trace.back()) + " after " +
                                    std::to_string(k_max) + " applications",
                                out.residual_trace);
    out.x = operator_apply(spec, out.x);
    ++out.iterations;
    const double r = feasibility(spec, out.x);
    increases = r > out.residual_trace.back() ? increases + 1 : 0;
    out.residual_trace.push_back(r);
    if (increases >= 2)
      throw DivergenceError("post_process: feasibility increased twice in a row",
                            out.residual_trace);
  }
  return out;
}

namespace {

Matrix checked_jacobian(const ManifoldSpec& spec, const Vector& x) {
  if (!is_feasible(spec, x))
    throw ArgumentError("multiplier requires a feasible point, |c(x)| = " +
                        std::to_string(feasibility(spec, x)));
  Matrix J = constraint_jacobian(spec, x);
  const Vector sigma = Eigen::JacobiSVD<Matrix>(J).singularValues();
  const double sigma_min = sigma(sigma.size() - 1);
  if (!(sigma_min > 1e-10 * std::max(1.0, sigma(0))))
    throw DegeneracyError("constraint Jacobian is rank deficient (LICQ fails)", sigma_min);
  return J;
}

Vector least_squares_multiplier(const Matrix& J, const Vector& g) {
  return J.householderQr().solve(g);
}

}  // namespace

Vector multiplier(const ManifoldSpec& spec, const Objective& objective, const Vector& x) {
  const Matrix J = checked_jacobian(spec, x);
  return least_squares_multiplier(J, objective.gradient(x));
}

Vector riemannian_grad(const ManifoldSpec& spec, const Objective& objective, const Vector& x) {
  const Matrix J = checked_jacobian(spec, x);
  const Vector g = objective.gradient(x);
  return g - J * least_squares_multiplier(J, g);
}

ProjectedHessian projected_hessian(const ManifoldSpec& spec, const Objective& objective,
                                   const Vector& x) {
  if (!objective.has_hessian())
    throw CapabilityError("projected_hessian needs objective.hess_vec");
  const Vector lambda = multiplier(spec, objective, x);
  const Matrix U = tangent_basis(spec, x);
  Matrix HU(U.rows(), U.cols());
  for (Index j = 0; j < U.cols(); ++j) {
    const Vector u = U.col(j);
    HU.col(j) = objective.hess_vec(x, u) - constraint_jac_diff_apply(spec, x, u, lambda);
  }
  Matrix H = U.transpose() * HU;
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  return {std::move(H), eig.eigenvalues()};
}

}  // namespace cdopt
