#include <cdopt/solvers.hpp>

#include "solver_support.hpp"

#include <cmath>
#include <limits>

namespace cdopt {
namespace {

/// tau >= 0 with |z + tau d| = radius.
double to_boundary(const Vector& z, const Vector& d, double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * z.dot(d);
  const double c = z.squaredNorm() - radius * radius;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  return (-b + std::sqrt(disc)) / (2.0 * a);
}

struct InnerStep {
  Vector p;
  Vector Hp;
  bool hit_boundary = false;
};

/// Steihaug-Toint truncated CG on min g^T p + 1/2 p^T H p, |p| <= radius.
InnerStep steihaug(detail::Evaluator& ev, const Vector& x, const Vector& g, double radius,
                   double tol, Index max_iter) {
  const Index n = g.size();
  InnerStep out{Vector::Zero(n), Vector::Zero(n)};
  Vector r = g;
  Vector d = -r;
  double rr = r.squaredNorm();
  for (Index j = 0; j < max_iter; ++j) {
    const Vector Hd = ev.hess_vec(x, d);
    const double dHd = d.dot(Hd);
    if (dHd <= 0.0) {
      const double tau = to_boundary(out.p, d, radius);
      out.p += tau * d;
      out.Hp += tau * Hd;
      out.hit_boundary = true;
      return out;
    }
    const double alpha = rr / dHd;
    const Vector p_next = out.p + alpha * d;
    if (p_next.norm() >= radius) {
      const double tau = to_boundary(out.p, d, radius);
      out.p += tau * d;
      out.Hp += tau * Hd;
      out.hit_boundary = true;
      return out;
    }
    out.p = p_next;
    out.Hp += alpha * Hd;
    r += alpha * Hd;
    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= tol) return out;
    d = -r + (rr_next / rr) * d;
    rr = rr_next;
  }
  return out;
}

InnerStep cauchy_point(detail::Evaluator& ev, const Vector& x, const Vector& g, double radius) {
  const Vector Hg = ev.hess_vec(x, g);
  const double gHg = g.dot(Hg);
  const double gnorm = g.norm();
  double tau = 1.0;
  if (gHg > 0.0) tau = std::min(1.0, gnorm * gnorm * gnorm / (radius * gHg));
  const double scale = tau * radius / gnorm;
  return {-scale * g, -scale * Hg, tau == 1.0};
}

}  // namespace

SolveReport minimize_tr_newton_cg(const Objective& f, const Vector& x0, const SolveConfig& cfg) {
  cfg.validate();
  if (!f.has_hessian()) throw CapabilityError("trust-region Newton-CG needs hess_vec");
  detail::Evaluator ev(f);
  detail::Progress progress(ev, cfg);

  Vector x = x0;
  double fx = ev.value(x);
  Vector g = ev.gradient(x);
  detail::require_finite(fx, "initial objective value");
  progress.start(x, fx, g.norm());

  double radius = cfg.tr_initial_radius;
  const Index n = x.size();
  while (!progress.should_stop()) {
    const double gnorm = g.norm();
    // Forcing term min(0.5, sqrt|g|) |g|, tightened below the outer tolerance.
    const double tol = std::min(std::min(0.5, std::sqrt(gnorm)) * gnorm, 0.5 * cfg.grad_tol);
    InnerStep step = steihaug(ev, x, g, radius, tol, 2 * n + 10);
    double predicted = -(g.dot(step.p) + 0.5 * step.p.dot(step.Hp));
    if (!(predicted > 0.0)) {
      step = cauchy_point(ev, x, g, radius);
      predicted = -(g.dot(step.p) + 0.5 * step.p.dot(step.Hp));
    }

    const Vector x_trial = x + step.p;
    const double f_trial = ev.value(x_trial);
    const double actual = fx - f_trial;
    const double ratio = std::isfinite(f_trial) ? actual / predicted : -1.0;

    if (ratio < 0.25)
      radius = 0.25 * std::min(radius, step.p.norm());
    else if (ratio > 0.75 && step.hit_boundary)
      radius = std::min(2.0 * radius, cfg.tr_max_radius);

    if (ratio > cfg.tr_accept) {
      x = x_trial;
      fx = f_trial;
      g = ev.gradient(x);
    }
    progress.record(x, fx, g.norm());

    if (radius <= std::numeric_limits<double>::epsilon() * std::max(1.0, x.norm()))
      progress.stagnate("trust-region radius collapsed");
  }
  return progress.finish(*progress.should_stop());
}

}  // namespace cdopt
