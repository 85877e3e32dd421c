#pragma once

#include <cdopt/manifolds.hpp>

#include <vector>

namespace cdopt {

/// How cdf_hess_vec obtains second-order information.
enum class HessianMode {
  /// Requires objective.hess_vec; throws CapabilityError otherwise.
  Analytic,
  /// Central differences of cdf_grad when objective.hess_vec is absent.
  FiniteDifference,
};

/// h(x) = f(A(x)) + beta/2 |c(x)|^2 for a fixed manifold, objective and beta.
class CdfInstance {
 public:
  CdfInstance(ManifoldSpec spec, Objective objective, double beta,
              HessianMode mode = HessianMode::Analytic);

  const ManifoldSpec& spec() const { return spec_; }
  const Objective& objective() const { return objective_; }
  double beta() const { return beta_; }
  HessianMode hessian_mode() const { return mode_; }
  bool has_hessian() const;

  CdfInstance with_beta(double beta) const;

 private:
  ManifoldSpec spec_;
  Objective objective_;
  double beta_;
  HessianMode mode_;
};

double cdf_value(const CdfInstance& inst, const Vector& x);
/// J_A(x) grad f(A(x)) + beta J_c(x) c(x).
Vector cdf_grad(const CdfInstance& inst, const Vector& x);
/// Both of the above sharing one evaluation of A(x) and c(x).
std::pair<double, Vector> cdf_value_grad(const CdfInstance& inst, const Vector& x);
Vector cdf_hess_vec(const CdfInstance& inst, const Vector& x, const Vector& d);

/// h, grad h and (when available) the Hessian action as solver contracts.
Objective cdf_objective(const CdfInstance& inst);

/// Sampling parameters for the penalty estimate.
struct PenaltyConfig {
  int n_samples = 20;
  double radius = 1.0;
  double safety = 2.5;
  double floor = 1e-10;

  void validate() const;
};

/// N points uniform in the closed ball of the given radius around `center`.
std::vector<Vector> sample_ball(const Vector& center, double radius, int count, Rng& rng);

/// 2 theta max_i max{ (f(A^2 x_i) - f(A x_i)) / (| |c(x_i)|^2 - |c(A x_i)|^2 | + eps), 0 }.
double estimate_beta_from_samples(const ManifoldSpec& spec, const Objective& objective,
                                  const std::vector<Vector>& samples, const PenaltyConfig& cfg);
double estimate_beta(const ManifoldSpec& spec, const Objective& objective, const Vector& x_ref,
                     const PenaltyConfig& cfg, Rng& rng);

struct PostProcessResult {
  Vector x;
  int iterations = 0;
  /// |c| before each application and after the last one.
  std::vector<double> residual_trace;
};

/// x <- A(x) until |c(x)| <= eps_f. Throws DivergenceError after two consecutive
/// increases of |c| and NonConvergenceError when k_max applications do not suffice.
PostProcessResult post_process(const ManifoldSpec& spec, const Vector& x, double eps_f,
                               int k_max = 50);

/// Least-squares multipliers lambda(x) = J_c(x)^+ grad f(x).
Vector multiplier(const ManifoldSpec& spec, const Objective& objective, const Vector& x);

/// grad f(x) - J_c(x) lambda(x).
Vector riemannian_grad(const ManifoldSpec& spec, const Objective& objective, const Vector& x);

struct ProjectedHessian {
  Matrix H;
  /// Ascending.
  Vector eigenvalues;
};

/// U_x^T (Hess f - sum_i lambda_i Hess c_i) U_x with U_x from tangent_basis.
/// Second-order stationarity at a critical point is read off the smallest eigenvalue.
ProjectedHessian projected_hessian(const ManifoldSpec& spec, const Objective& objective,
                                   const Vector& x);

}  // namespace cdopt
