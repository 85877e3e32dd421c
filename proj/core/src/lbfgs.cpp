#include <cdopt/solvers.hpp>

#include "solver_support.hpp"

#include <deque>

namespace cdopt {
namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

Vector two_loop(const std::deque<CurvaturePair>& memory, const Vector& g) {
  Vector q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return -q;
}

}  // namespace

SolveReport minimize_lbfgs(const Objective& f, const Vector& x0, const SolveConfig& cfg) {
  cfg.validate();
  detail::Evaluator ev(f);
  detail::Progress progress(ev, cfg);
  const Objective counted = ev.counted();

  Vector x = x0;
  double fx = ev.value(x);
  Vector g = ev.gradient(x);
  detail::require_finite(fx, "initial objective value");
  progress.start(x, fx, g.norm());

  std::deque<CurvaturePair> memory;
  while (!progress.should_stop()) {
    Vector d = two_loop(memory, g);
    if (!(g.dot(d) < 0.0)) {
      memory.clear();
      d = -g;
    }
    const double t0 = memory.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    const double c2 = cfg.exact_line_search ? 1e-8 : cfg.curvature;
    const double c1 = std::min(cfg.sufficient_decrease, 0.5 * c2);

    LineSearchResult ls;
    try {
      ls = line_search_wolfe(counted, x, fx, g, d, c1, c2, t0,
                             cfg.max_line_search_evals);
    } catch (const LineSearchError& e) {
      if (memory.empty()) progress.stagnate(std::string("L-BFGS: ") + e.what());
      memory.clear();
      continue;
    }

    const Vector s = ls.step * d;
    const Vector y = ls.gradient - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) memory.pop_front();
    }
    x += s;
    fx = ls.value;
    g = ls.gradient;
    progress.record(x, fx, g.norm());
  }
  return progress.finish(*progress.should_stop());
}

}  // namespace cdopt
