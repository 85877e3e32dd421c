#include <cdopt/solvers.hpp>

#include <array>

namespace cdopt {
namespace {

constexpr std::array<std::pair<SolverKind, std::string_view>, 4> kSolverNames{{
    {SolverKind::Lbfgs, "lbfgs"},
    {SolverKind::ConjugateGradient, "cg"},
    {SolverKind::TrustRegionNewtonCg, "trncg"},
    {SolverKind::CubicMomentum, "crm"},
}};

}  // namespace

std::string_view to_string(SolverKind kind) {
  for (const auto& [k, name] : kSolverNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  for (const auto& [k, n] : kSolverNames)
    if (n == name) return k;
  return std::nullopt;
}

bool needs_hessian(SolverKind kind) {
  return kind == SolverKind::TrustRegionNewtonCg || kind == SolverKind::CubicMomentum;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::MaxTime: return "max_time";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  if (!(grad_tol > 0.0)) throw ArgumentError("grad_tol must be positive");
  if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");
  if (!(max_time > 0.0)) throw ArgumentError("max_time must be positive");
  if (!(0.0 < sufficient_decrease && sufficient_decrease < curvature && curvature < 1.0))
    throw ArgumentError("line search constants must satisfy 0 < c1 < c2 < 1");
  if (!(sufficient_decrease < cg_curvature && cg_curvature < 1.0))
    throw ArgumentError("CG curvature constant must lie in (c1, 1)");
  if (lbfgs_memory < 1) throw ArgumentError("L-BFGS memory must be positive");
  if (!(tr_initial_radius > 0.0 && tr_initial_radius <= tr_max_radius))
    throw ArgumentError("trust-region radii must satisfy 0 < initial <= max");
  if (!(tr_accept >= 0.0 && tr_accept < 0.25))
    throw ArgumentError("trust-region acceptance threshold must lie in [0, 0.25)");
}

void CrmConfig::validate() const {
  if (!(nu > 0.0)) throw ArgumentError("CRm nu must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("CRm rho must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("CRm eta must lie in (0, 1)");
  if (max_krylov_dim < 1) throw ArgumentError("CRm Krylov dimension must be positive");
}

SolveReport solve(SolverKind kind, const Objective& f, const Vector& x0, const SolveConfig& cfg,
                  const CrmConfig& crm) {
  switch (kind) {
    case SolverKind::Lbfgs: return minimize_lbfgs(f, x0, cfg);
    case SolverKind::ConjugateGradient: return minimize_cg(f, x0, cfg);
    case SolverKind::TrustRegionNewtonCg: return minimize_tr_newton_cg(f, x0, cfg);
    case SolverKind::CubicMomentum: return minimize_crm(f, x0, cfg, crm);
  }
  throw ArgumentError("unknown solver kind");
}

}  // namespace cdopt
