#include <cdopt/solvers.hpp>

#include "solver_support.hpp"

namespace cdopt {

SolveReport minimize_cg(const Objective& f, const Vector& x0, const SolveConfig& cfg) {
  cfg.validate();
  detail::Evaluator ev(f);
  detail::Progress progress(ev, cfg);
  const Objective counted = ev.counted();

  Vector x = x0;
  double fx = ev.value(x);
  Vector g = ev.gradient(x);
  detail::require_finite(fx, "initial objective value");
  progress.start(x, fx, g.norm());

  const Index n = x.size();
  const double c2 = cfg.exact_line_search ? 1e-8 : cfg.cg_curvature;
  const double c1 = std::min(cfg.sufficient_decrease, 0.5 * c2);
  Vector d = -g;
  double t0 = std::min(1.0, 1.0 / g.norm());
  Index since_restart = 0;
  bool restarted = true;

  while (!progress.should_stop()) {
    LineSearchResult ls;
    try {
      ls = line_search_wolfe(counted, x, fx, g, d, c1, c2, t0,
                             cfg.max_line_search_evals);
    } catch (const LineSearchError& e) {
      if (restarted) progress.stagnate(std::string("CG: ") + e.what());
      d = -g;
      t0 = std::min(1.0, 1.0 / g.norm());
      restarted = true;
      continue;
    }

    const double gd_old = g.dot(d);
    x += ls.step * d;
    fx = ls.value;
    const Vector g_new = ls.gradient;
    progress.record(x, fx, g_new.norm());

    // Polak-Ribiere+, restarted every n steps or when the result is not a descent direction.
    const double beta = std::max(0.0, g_new.dot(g_new - g) / g.squaredNorm());
    Vector d_new = -g_new + beta * d;
    ++since_restart;
    restarted = false;
    if (since_restart >= n || !(g_new.dot(d_new) < 0.0)) {
      d_new = -g_new;
      since_restart = 0;
      restarted = true;
    }
    // Initial step from the previous directional derivative ratio.
    t0 = ls.step * gd_old / g_new.dot(d_new);
    if (!(t0 > 0.0) || !std::isfinite(t0)) t0 = 1.0;
    g = g_new;
    d = d_new;
  }
  return progress.finish(*progress.should_stop());
}

}  // namespace cdopt
