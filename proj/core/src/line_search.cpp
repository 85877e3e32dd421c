#include <cdopt/solvers.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdopt {
namespace {

struct Trial {
  double t;
  double phi;
  double dphi;
};

/// Minimizer of the cubic interpolating (phi, dphi) at a and b, kept inside
/// the middle 80% of the interval; falls back to bisection.
double interpolate(const Trial& a, const Trial& b) {
  const double lo = std::min(a.t, b.t);
  const double hi = std::max(a.t, b.t);
  const double margin = 0.1 * (hi - lo);
  const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.t - b.t);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.t - a.t);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom != 0.0) {
      const double cand = b.t - (b.t - a.t) * (b.dphi + d2 - d1) / denom;
      if (std::isfinite(cand)) t = cand;
    }
  }
  return std::clamp(t, lo + margin, hi - margin);
}

}  // namespace

LineSearchResult line_search_wolfe(const Objective& f, const Vector& x, double fx,
                                   const Vector& gx, const Vector& direction, double c1,
                                   double c2, double initial_step, int max_evals) {
  const double dphi0 = gx.dot(direction);
  if (!(dphi0 < 0.0)) throw ArgumentError("line search direction is not a descent direction");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0))
    throw ArgumentError("line search constants must satisfy 0 < c1 < c2 < 1");

  LineSearchResult out;
  Vector g_trial;
  auto evaluate = [&](double t) {
    const Vector xt = x + t * direction;
    ++out.evaluations;
    Trial tr{t, f.value(xt), 0.0};
    g_trial = f.gradient(xt);
    tr.dphi = g_trial.dot(direction);
    return tr;
  };
  auto armijo = [&](const Trial& tr) { return tr.phi <= fx + c1 * tr.t * dphi0; };
  auto curvature = [&](const Trial& tr) { return std::abs(tr.dphi) <= -c2 * dphi0; };

  // Best sufficient-decrease point, returned if the bracket is exhausted.
  std::optional<Trial> best;
  Vector best_grad;
  auto consider = [&](const Trial& tr) {
    if (std::isfinite(tr.phi) && armijo(tr) && tr.phi < fx && (!best || tr.phi < best->phi)) {
      best = tr;
      best_grad = g_trial;
    }
  };
  auto accept = [&](const Trial& tr) {
    out.step = tr.t;
    out.value = tr.phi;
    out.gradient = g_trial;
    return out;
  };

  auto zoom = [&](Trial lo, Trial hi) -> LineSearchResult {
    while (out.evaluations < max_evals) {
      if (std::abs(hi.t - lo.t) <= std::numeric_limits<double>::epsilon() * std::abs(lo.t)) break;
      const Trial tr = evaluate(interpolate(lo, hi));
      consider(tr);
      if (!std::isfinite(tr.phi) || !armijo(tr) || tr.phi >= lo.phi) {
        hi = tr;
      } else {
        if (curvature(tr)) return accept(tr);
        if (tr.dphi * (hi.t - lo.t) >= 0.0) hi = lo;
        lo = tr;
      }
    }
    if (best) {
      out.step = best->t;
      out.value = best->phi;
      out.gradient = best_grad;
      out.strong_wolfe = false;
      return out;
    }
    throw LineSearchError("line search could not find a point with sufficient decrease");
  };

  Trial prev{0.0, fx, dphi0};
  double t = initial_step;
  for (int i = 0; out.evaluations < max_evals; ++i) {
    const Trial tr = evaluate(t);
    consider(tr);
    if (!std::isfinite(tr.phi) || !armijo(tr) || (i > 0 && tr.phi >= prev.phi))
      return zoom(prev, tr);
    if (curvature(tr)) return accept(tr);
    if (tr.dphi >= 0.0) return zoom(tr, prev);
    prev = tr;
    t *= 2.0;
  }
  if (best) {
    out.step = best->t;
    out.value = best->phi;
    out.gradient = best_grad;
    out.strong_wolfe = false;
    return out;
  }
  throw LineSearchError("line search exhausted its evaluation budget");
}

}  // namespace cdopt
