#pragma once

#include <cdopt/errors.hpp>
#include <cdopt/types.hpp>

#include <optional>
#include <string_view>
#include <vector>

namespace cdopt {

enum class SolverKind { Lbfgs, ConjugateGradient, TrustRegionNewtonCg, CubicMomentum };

/// "lbfgs", "cg", "trncg", "crm".
std::string_view to_string(SolverKind kind);
std::optional<SolverKind> parse_solver_kind(std::string_view name);
bool needs_hessian(SolverKind kind);

enum class SolveStatus { Converged, MaxIterations, MaxTime };
std::string_view to_string(SolveStatus status);

struct SolveConfig {
  double grad_tol = 1e-5;
  int max_iter = 10000;
  double max_time = 1200.0;  // seconds

  double sufficient_decrease = 1e-4;
  double curvature = 0.9;
  /// Curvature constant used by nonlinear CG (PR+ needs a tighter line search).
  double cg_curvature = 0.4;
  /// Drive the line search to |phi'(t)| <= 1e-8 |phi'(0)|.
  bool exact_line_search = false;
  int max_line_search_evals = 40;

  int lbfgs_memory = 10;

  double tr_initial_radius = 1.0;
  double tr_max_radius = 1e3;
  /// Steps with actual/predicted reduction above this are accepted.
  double tr_accept = 0.15;

  bool capture_history = true;

  void validate() const;
};

struct CrmConfig {
  /// Initial cubic weight.
  double nu = 1.0;
  /// Momentum cap, in (0, 1).
  double rho = 0.5;
  /// Relative model-gradient tolerance for the cubic subproblem, in (0, 1).
  double eta = 0.1;
  /// Halve nu after steps whose actual/predicted reduction exceeds 0.9.
  bool adaptive_nu = true;
  int max_krylov_dim = 50;

  void validate() const;
};

struct IterationRecord {
  double fval;
  double grad_norm;
};

/// One accepted CRm iteration; `tau` was computed from exactly these fields.
struct CrmStep {
  double h_x;          // h(x_k)
  double h_y;          // h(y_{k+1})
  double h_v;          // h(v_{k+1})
  double grad_norm_y;  // |grad h(y_{k+1})|
  double step_norm;    // |y_{k+1} - x_k|
  double rho;
  double tau;
  double nu;
  bool took_momentum;
};

struct SolveReport {
  Vector x;
  double fval = 0.0;
  int iterations = 0;
  int nfev = 0;
  int ngev = 0;
  int nhev = 0;
  double grad_norm = 0.0;
  double wall_time = 0.0;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<IterationRecord> history;
  std::vector<CrmStep> crm_steps;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// A solver could not make progress. The best point reached is attached.
class StagnationError : public Error {
 public:
  StagnationError(const std::string& what, SolveReport partial)
      : Error(what), report_(std::move(partial)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  Vector gradient;
  int evaluations = 0;
  /// False when the bracket was exhausted and a sufficient-decrease point was
  /// returned instead of a strong Wolfe point.
  bool strong_wolfe = true;
};

/// Raised when no step with sufficient decrease could be found.
class LineSearchError : public Error {
 public:
  using Error::Error;
};

/// Strong Wolfe line search (bracketing + cubic-interpolation zoom) along a
/// descent direction. Throws ArgumentError when g^T d >= 0.
LineSearchResult line_search_wolfe(const Objective& f, const Vector& x, double fx,
                                   const Vector& gx, const Vector& direction, double c1,
                                   double c2, double initial_step = 1.0, int max_evals = 40);

SolveReport minimize_lbfgs(const Objective& f, const Vector& x0, const SolveConfig& cfg);
/// Polak-Ribiere+ nonlinear conjugate gradient with restarts.
SolveReport minimize_cg(const Objective& f, const Vector& x0, const SolveConfig& cfg);
/// Trust-region Newton with a Steihaug-Toint CG inner solver.
SolveReport minimize_tr_newton_cg(const Objective& f, const Vector& x0, const SolveConfig& cfg);

struct CubicStep {
  Vector d;
  /// |g + H d + nu/2 |d| d|.
  double model_grad_norm = 0.0;
  /// g^T d + 1/2 d^T H d + nu/6 |d|^3.
  double model_value = 0.0;
  Index krylov_dim = 0;
  bool restarted = false;
  /// Tolerance not met after the restart.
  bool inexact = false;
};

using LinearOperator = std::function<Vector(const Vector&)>;

/// argmin_d g^T d + 1/2 d^T H d + nu/6 |d|^3 via Lanczos and a secular equation.
CubicStep cubic_subproblem(const Vector& g, const LinearOperator& hess_vec, double nu, double eta,
                           int max_krylov_dim = 50);

/// Cubic regularization with momentum.
SolveReport minimize_crm(const Objective& f, const Vector& x0, const SolveConfig& cfg,
                         const CrmConfig& crm = {});

SolveReport solve(SolverKind kind, const Objective& f, const Vector& x0, const SolveConfig& cfg,
                  const CrmConfig& crm = {});

}  // namespace cdopt
