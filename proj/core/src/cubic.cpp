#include <cdopt/solvers.hpp>

#include "solver_support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace cdopt {
namespace {

struct ReducedSolution {
  Vector y;
  double model_value = 0.0;
};

/// argmin_y b^T y + 1/2 y^T T y + nu/6 |y|^3 for a small symmetric T.
///
/// The minimizer is y = -(T + sigma I)^{-1} b with sigma = nu/2 |y| and
/// T + sigma I positive semidefinite; sigma solves |y(sigma)| = 2 sigma / nu.
ReducedSolution solve_reduced(const Matrix& T, const Vector& b, double nu) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(T);
  const Vector& lambda = eig.eigenvalues();
  const Matrix& W = eig.eigenvectors();
  const Vector bw = W.transpose() * b;
  const double sigma_lo = std::max(0.0, -lambda(0));
  // Shifted eigenvalues lambda_i + sigma_lo, computed once so the smallest is exact.
  const Vector shifted = lambda.array() + sigma_lo;

  auto norm_y = [&](double t) {
    double s = 0.0;
    for (Index i = 0; i < bw.size(); ++i) {
      const double den = shifted(i) + t;
      if (den > 0.0) s += bw(i) * bw(i) / (den * den);
      else if (bw(i) != 0.0) return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(s);
  };
  auto psi = [&](double t) { return norm_y(t) - 2.0 * (sigma_lo + t) / nu; };

  Vector yw(bw.size());
  double t = 0.0;
  if (psi(0.0) <= 0.0) {
    // Hard case: the shift cannot leave the convexified region, so pad the
    // solution along the bottom eigenvector up to |y| = 2 sigma_lo / nu.
    for (Index i = 0; i < bw.size(); ++i) yw(i) = shifted(i) > 0.0 ? -bw(i) / shifted(i) : 0.0;
    const double target = 2.0 * sigma_lo / nu;
    yw(0) += std::sqrt(std::max(0.0, target * target - yw.squaredNorm()));
  } else {
    double lo = 0.0;
    double hi = std::max(1.0, sigma_lo);
    while (psi(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (psi(mid) > 0.0 ? lo : hi) = mid;
    }
    t = hi;
    for (Index i = 0; i < bw.size(); ++i) yw(i) = -bw(i) / (shifted(i) + t);
  }
  ReducedSolution out;
  out.y = W * yw;
  const double ny = out.y.norm();
  out.model_value = b.dot(out.y) + 0.5 * out.y.dot(T * out.y) + nu / 6.0 * ny * ny * ny;
  return out;
}

struct LanczosResult {
  Vector d;
  double model_value;
  Index dim;
  bool breakdown;
};

LanczosResult lanczos_cubic(const Vector& g, const Vector& seed, const LinearOperator& H,
                            double nu, double eta, int max_dim) {
  const Index n = g.size();
  const Index kmax = std::min<Index>(max_dim, n);
  Matrix Q(n, kmax);
  Vector alpha(kmax);
  Vector beta(kmax);
  Q.col(0) = seed.normalized();
  const double gnorm = g.norm();

  ReducedSolution sol;
  Index k = 0;
  bool breakdown = false;
  for (; k < kmax; ++k) {
    Vector w = H(Q.col(k));
    alpha(k) = Q.col(k).dot(w);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    beta(k) = w.norm();

    Matrix T = Matrix::Zero(k + 1, k + 1);
    for (Index i = 0; i <= k; ++i) {
      T(i, i) = alpha(i);
      if (i > 0) T(i, i - 1) = T(i - 1, i) = beta(i - 1);
    }
    const Vector b = Q.leftCols(k + 1).transpose() * g;
    sol = solve_reduced(T, b, nu);

    const double scale = std::max(std::abs(alpha.head(k + 1).maxCoeff()), 1.0);
    breakdown = beta(k) <= 1e-12 * scale;
    if (breakdown || std::abs(beta(k) * sol.y(k)) <= 0.5 * eta * gnorm) {
      ++k;
      break;
    }
    if (k + 1 < kmax) Q.col(k + 1) = w / beta(k);
  }
  k = std::min(k, kmax);
  return {Q.leftCols(k) * sol.y, sol.model_value, k, breakdown};
}

}  // namespace

CubicStep cubic_subproblem(const Vector& g, const LinearOperator& hess_vec, double nu, double eta,
                           int max_krylov_dim) {
  if (!(nu > 0.0)) throw ArgumentError("cubic weight nu must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("cubic tolerance eta must lie in (0, 1)");
  CubicStep out;
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.d = Vector::Zero(g.size());
    return out;
  }

  auto residual = [&](const Vector& d) {
    return (g + hess_vec(d) + 0.5 * nu * d.norm() * d).norm();
  };

  LanczosResult lz = lanczos_cubic(g, g, hess_vec, nu, eta, max_krylov_dim);
  double res = residual(lz.d);
  if (res > eta * gnorm) {
    // Fixed perturbation so the restart is reproducible.
    Rng rng(0x5eed);
    std::normal_distribution<double> normal;
    Vector noise(g.size());
    for (Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
    const Vector seed = g / gnorm + 1e-2 * noise.normalized();
    LanczosResult retry = lanczos_cubic(g, seed, hess_vec, nu, eta, max_krylov_dim);
    const double res_retry = residual(retry.d);
    out.restarted = true;
    if (retry.model_value <= lz.model_value) {
      lz = std::move(retry);
      res = res_retry;
    }
    out.inexact = res > eta * gnorm;
  }
  out.d = std::move(lz.d);
  out.model_value = lz.model_value;
  out.model_grad_norm = res;
  out.krylov_dim = lz.dim;
  return out;
}

SolveReport minimize_crm(const Objective& f, const Vector& x0, const SolveConfig& cfg,
                         const CrmConfig& crm) {
  cfg.validate();
  crm.validate();
  if (!f.has_hessian()) throw CapabilityError("CRm needs hess_vec");
  detail::Evaluator ev(f);
  detail::Progress progress(ev, cfg);

  Vector x = x0;
  Vector y = x0;
  double hx = ev.value(x);
  Vector g = ev.gradient(x);
  detail::require_finite(hx, "initial objective value");
  progress.start(x, hx, g.norm());

  double nu = crm.nu;
  constexpr double kNuMin = 1e-6;
  constexpr double kNuMax = 1e30;

  while (!progress.should_stop()) {
    const LinearOperator H = [&](const Vector& v) { return ev.hess_vec(x, v); };

    // Cubic step; nu doubles until h actually decreases.
    CubicStep step;
    Vector y_next;
    double hy = 0.0;
    double agreement = 0.0;
    for (;;) {
      step = cubic_subproblem(g, H, nu, crm.eta, crm.max_krylov_dim);
      y_next = x + step.d;
      hy = ev.value(y_next);
      const double predicted = -step.model_value;
      agreement = predicted > 0.0 ? (hx - hy) / predicted : 0.0;
      if (std::isfinite(hy) && hy <= hx && agreement >= 0.1) break;
      if (std::isfinite(hy) && hy <= hx && predicted <= 1e-15 * (1.0 + std::abs(hx))) break;
      nu *= 2.0;
      if (nu > kNuMax) progress.stagnate("CRm: cubic weight diverged without decrease");
    }

    const Vector gy = ev.gradient(y_next);
    CrmStep rec;
    rec.h_x = hx;
    rec.h_y = hy;
    rec.grad_norm_y = gy.norm();
    rec.step_norm = (y_next - x).norm();
    rec.rho = crm.rho;
    rec.nu = nu;
    rec.tau = std::min({crm.rho, rec.grad_norm_y, rec.step_norm});

    const Vector v = y_next + rec.tau * (y_next - y);
    rec.h_v = ev.value(v);
    rec.took_momentum = std::isfinite(rec.h_v) && rec.h_v < hy;
    if (rec.took_momentum) {
      x = v;
      hx = rec.h_v;
      g = ev.gradient(x);
    } else {
      x = y_next;
      hx = hy;
      g = gy;
    }
    y = y_next;
    progress.report.crm_steps.push_back(rec);
    progress.record(x, hx, g.norm());

    if (crm.adaptive_nu && agreement >= 0.9) nu = std::max(0.5 * nu, kNuMin);
  }
  return progress.finish(*progress.should_stop());
}

}  // namespace cdopt
