#pragma once

#include <cdopt/cdf.hpp>
#include <cdopt/solvers.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cdopt {

/// Outcome of one numerical check.
///
/// Every measured quantity is stored alongside its allowance; `worst` is the
/// largest measured/allowed ratio, so `pass` holds exactly when worst <= 1.
struct CheckReport {
  std::string name;
  bool pass = true;
  std::map<std::string, double> measured;
  /// Diagnostics that do not enter the pass decision.
  std::map<std::string, double> info;
  double worst = 0.0;
  double tol = 0.0;
  int n = 0;
  std::string note;

  /// Records a quantity and folds measured/allowed into `worst` and `pass`.
  void expect_le(const std::string& key, double value, double allowed);
};

/// One JSON object: {"name","pass","worst","tol","n"}.
std::string to_json_line(const CheckReport& report);

/// Fixed point, null composition J_A J_c = 0, idempotence J_A^2 = J_A and the
/// tangent identity J_A^T d = d on T_x, at n_points feasible samples. The fixed
/// point is held to 1e-12 (1 + |x|); the other three to tol.
CheckReport check_operator_axioms(const ManifoldSpec& spec, int n_points, double tol, Rng& rng);

/// Log-log slope of |c(A(y_t))| against |c(y_t)| for y_t = x + t (1 + |x|) d
/// with d a unit normal direction. Slopes must lie in [1.8, 2.2]; residuals
/// below 1e-14 are treated as exact. A direction is redrawn with a tenfold
/// smaller radius, up to 5 times, when |c(y_t)| > 0.1 or |c(A(y_t))| > |c(y_t)| / 2
/// at some scale.
CheckReport check_quadratic_decrease(const ManifoldSpec& spec, int n_points,
                                     const std::vector<double>& scales, Rng& rng);

/// Central differences of `value` against `gradient` along random unit
/// directions, at feasible samples and at perturbed points. Relative error is
/// measured against max(1, |grad|).
CheckReport check_gradient_fd(const ManifoldSpec& spec,
                              const std::function<double(const Vector&)>& value,
                              const std::function<Vector(const Vector&)>& gradient,
                              int n_points, double tol, Rng& rng);
CheckReport check_gradient_fd(const CdfInstance& inst, int n_points, double tol, Rng& rng);

/// cdf_hess_vec against central differences of cdf_grad, plus the pairing
/// u^T H v = v^T H u to 1e-8. Throws CapabilityError without a Hessian path.
CheckReport check_hess_fd(const CdfInstance& inst, int n_points, double tol, Rng& rng);

/// Solve, post-process, then check |c| <= 1e-12, |grad f| <= 2 tol_grad + 1e-10
/// and a monotone decrease of the CDF value. An empty x0 is replaced by a
/// feasible sample.
CheckReport check_stationarity_transfer(const CdfInstance& inst, SolverKind solver,
                                        const Vector& x0, double tol_grad, Rng& rng);

/// Reference manifold of each kind at the sizes used by the default suite.
ManifoldSpec reference_manifold(ManifoldKind kind, int nu = 1);

/// Same model with A(x) replaced by A(x) + eps * 1.
ManifoldSpec with_operator_shift(const ManifoldSpec& spec, double eps);

enum class VerifyFault {
  None,
  OperatorShift,
  DropPenaltyGradient,
};

struct VerifyOptions {
  std::uint64_t master_seed = 0;
  /// Empty means every kind.
  std::vector<ManifoldKind> kinds;
  VerifyFault fault = VerifyFault::None;
};

/// Runs every check for the selected kinds. Each check draws from its own
/// stream derived from (master seed, check name).
std::vector<CheckReport> run_verification_suite(const VerifyOptions& options);

}  // namespace cdopt
