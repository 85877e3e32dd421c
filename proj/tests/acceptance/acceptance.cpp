// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cdopt/cdf.hpp>
#include <cdopt/problems.hpp>
#include <cdopt/solvers.hpp>
#include <cdopt/verify.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"

using namespace cdopt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Labeled {
  std::string label;
  ManifoldSpec spec;
};

std::vector<Labeled> every_kind() {
  return {
      {"sphere", reference_manifold(ManifoldKind::Sphere)},
      {"oblique", reference_manifold(ManifoldKind::Oblique)},
      {"stiefel", reference_manifold(ManifoldKind::Stiefel)},
      {"generalized_stiefel", reference_manifold(ManifoldKind::GeneralizedStiefel)},
      {"grassmann", reference_manifold(ManifoldKind::Grassmann)},
      {"hyperbolic", reference_manifold(ManifoldKind::Hyperbolic)},
      {"symplectic", reference_manifold(ManifoldKind::SymplecticStiefel)},
      {"lie_group_plus", reference_manifold(ManifoldKind::QuadraticLieGroup, 1)},
      {"lie_group_minus", reference_manifold(ManifoldKind::QuadraticLieGroup, -1)},
      {"generic", reference_manifold(ManifoldKind::Generic)},
  };
}

Vector unit_gaussian(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v.normalized();
}

// ---------------------------------------------------------------------------

Outcome operator_axioms() {
  Outcome out;
  double worst = 0.0;
  for (const Labeled& k : every_kind()) {
    Rng rng(derive_seed(1, k.label));
    const CheckReport r = check_operator_axioms(k.spec, 20, 1e-8, rng);
    worst = std::max(worst, r.worst);
    out.require(r.pass && r.n == 20, k.label + " worst ratio " + fmt(r.worst));
  }
  out.detail = out.pass ? "10 kinds x 20 samples, worst ratio " + fmt(worst) : out.detail;
  return out;
}

Outcome quadratic_decrease() {
  Outcome out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Labeled& k : every_kind()) {
    Rng rng(derive_seed(2, k.label));
    const CheckReport r = check_quadratic_decrease(k.spec, 10, {1e-1, 1e-2, 1e-3}, rng);
    out.require(r.pass, k.label + " slopes [" + fmt(r.info.at("min_slope")) + ", " +
                            fmt(r.info.at("max_slope")) + "] flagged " +
                            fmt(r.info.at("flagged")));
    lo = std::min(lo, r.info.at("min_slope"));
    hi = std::max(hi, r.info.at("max_slope"));
  }
  // Sphere identity c(A(y)) = -c(y)^2 / (1 + |y|^2)^2.
  const ManifoldSpec sp = reference_manifold(ManifoldKind::Sphere);
  Rng rng(derive_seed(2, "sphere_identity"));
  double identity = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vector x = sample_feasible(sp, rng);
    for (double t : {1e-1, 1e-2, 1e-3}) {
      const Vector y = x + t * unit_gaussian(x.size(), rng);
      const double cy = y.squaredNorm() - 1.0;
      const double lhs = constraint_eval(sp, operator_apply(sp, y))(0);
      const double q = 1.0 + y.squaredNorm();
      identity = std::max(identity, std::abs(lhs + cy * cy / (q * q)));
    }
  }
  out.require(identity <= 1e-12, "sphere identity residual " + fmt(identity));
  if (out.pass)
    out.detail = "slopes in [" + fmt(lo) + ", " + fmt(hi) + "], sphere identity " + fmt(identity);
  return out;
}

Outcome derivative_exactness() {
  Outcome out;
  struct Entry {
    ProblemInstance p;
    double beta;
  };
  const std::vector<Entry> problems = {
      {nsm_problem(5, 2, 0), 2.0},
      {geneig_problem(30, 3, 0.05, 0), 2.0},
      {ncm_problem(12, 3, 0.5, 0), 2.0},
      {hyperbola2d_problem(), 1.0},
  };
  double g_worst = 0.0, h_worst = 0.0, sym = 0.0;
  for (const Entry& e : problems) {
    const CdfInstance inst(e.p.spec, e.p.objective, e.beta);
    Rng rng(derive_seed(3, e.p.name));
    const CheckReport g = check_gradient_fd(inst, 5, 1e-5, rng);
    const CheckReport h = check_hess_fd(inst, 5, 1e-4, rng);
    out.require(g.pass, e.p.name + " gradient ratio " + fmt(g.worst));
    out.require(h.pass, e.p.name + " hessian ratio " + fmt(h.worst));
    g_worst = std::max(g_worst, g.worst * 1e-5);
    h_worst = std::max({h_worst, h.measured.at("rel_error_feasible"),
                        h.measured.at("rel_error_perturbed")});
    sym = std::max(sym, h.measured.at("symmetry"));
  }
  if (out.pass)
    out.detail = "grad rel err " + fmt(g_worst) + ", hess rel err " + fmt(h_worst) +
                 ", symmetry " + fmt(sym);
  return out;
}

/// Moves x along a random direction until |c| is close to `target`.
Vector start_at_residual(const ManifoldSpec& spec, const Vector& x, double target, Rng& rng) {
  const Vector d = unit_gaussian(x.size(), rng);
  double t = target;
  for (int i = 0; i < 60; ++i) {
    const double r = feasibility(spec, x + t * d);
    if (std::abs(r / target - 1.0) < 0.05) break;
    t *= std::sqrt(target / std::max(r, 1e-300));
  }
  return x + t * d;
}

Outcome post_processing_rate(std::string& trace_log) {
  Outcome out;
  int worst_steps = 0;
  std::ostringstream log;
  for (const Labeled& k : every_kind()) {
    Rng rng(derive_seed(4, k.label));
    for (int i = 0; i < 10; ++i) {
      const Vector y = start_at_residual(k.spec, sample_feasible(k.spec, rng), 1e-2, rng);
      try {
        const PostProcessResult r = post_process(k.spec, y, 1e-12, 4);
        worst_steps = std::max(worst_steps, r.iterations);
        if (i == 0) {
          log << "  trace " << k.label << ":";
          for (double v : r.residual_trace) log << ' ' << fmt(v);
          log << '\n';
        }
      } catch (const Error& e) {
        out.require(false, k.label + ": " + e.what());
      }
    }
  }
  trace_log = log.str();
  if (out.pass) out.detail = "max applications " + std::to_string(worst_steps);
  return out;
}

Outcome end_to_end_nsm() {
  Outcome out;
  const ProblemInstance p = nsm_problem(50, 5, 0);
  const CdfInstance inst(p.spec, p.objective, 2.0);
  const Objective h = cdf_objective(inst);
  SolveConfig cfg;
  cfg.grad_tol = 1e-5;
  std::string summary;
  for (SolverKind kind : {SolverKind::Lbfgs, SolverKind::ConjugateGradient,
                          SolverKind::TrustRegionNewtonCg, SolverKind::CubicMomentum}) {
    const std::string name(to_string(kind));
    try {
      const SolveReport rep = solve(kind, h, p.initial_point, cfg);
      const PostProcessResult pp = post_process(p.spec, rep.x, 1e-12);
      const double feas = feasibility(p.spec, pp.x);
      const double rg = riemannian_grad(p.spec, p.objective, pp.x).norm();
      out.require(rep.converged(), name + " did not converge");
      out.require(feas <= 1e-12, name + " feasibility " + fmt(feas));
      out.require(rg <= 2e-5, name + " riemannian grad " + fmt(rg));
      out.require(rep.iterations >= 10 && rep.iterations <= 1000,
                  name + " iterations " + std::to_string(rep.iterations));
      summary += name + " it=" + std::to_string(rep.iterations) + " feas=" + fmt(feas) +
                 " rgrad=" + fmt(rg) + " ";
    } catch (const Error& e) {
      out.require(false, name + ": " + e.what());
    }
  }
  if (out.pass) out.detail = summary;
  return out;
}

Outcome geneig_global() {
  Outcome out;
  int matched = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    app::RunConfig cfg;
    cfg.problem = "geneig";
    cfg.m = 100;
    cfg.s = 5;
    cfg.seed = seed;
    cfg.solver = SolverKind::TrustRegionNewtonCg;
    cfg.beta = 2.0;
    const app::BenchResult r = app::run_bench(cfg);
    const GenEigData data = geneig_matrices(100, cfg.density, seed);
    const double oracle = geneig_dense_oracle(Matrix(data.A), Matrix(data.B), 5);
    const double gap = std::abs(-2.0 * r.fval - oracle);
    worst_gap = std::max(worst_gap, gap);
    if (r.exit_code() == 0 && gap <= 1e-6) ++matched;
  }
  out.require(matched >= 8, "only " + std::to_string(matched) + "/10 seeds matched");
  out.detail += (out.detail.empty() ? "" : "; ") + std::to_string(matched) +
                "/10 seeds within 1e-6, worst gap " + fmt(worst_gap);
  return out;
}

Outcome crm_mechanics() {
  Outcome out;
  const ProblemInstance p = nsm_problem(10, 2, 0);
  const CdfInstance inst(p.spec, p.objective, 2.0);
  SolveConfig cfg;
  const SolveReport rep = minimize_crm(cdf_objective(inst), p.initial_point, cfg);
  out.require(!rep.crm_steps.empty(), "no CRm steps logged");
  out.require(rep.crm_steps.size() == static_cast<std::size_t>(rep.iterations),
              "log length differs from iteration count");
  double h_prev = cdf_value(inst, p.initial_point);
  int tau_mismatch = 0, increases = 0;
  for (const CrmStep& s : rep.crm_steps) {
    if (s.tau != std::min({s.rho, s.grad_norm_y, s.step_norm})) ++tau_mismatch;
    const double h_next = std::min(s.h_y, s.h_v);
    if (s.h_x != h_prev) ++tau_mismatch;  // log must chain h(x_k) exactly
    if (h_next > s.h_x) ++increases;
    h_prev = h_next;
  }
  for (std::size_t k = 1; k < rep.history.size(); ++k)
    if (rep.history[k].fval > rep.history[k - 1].fval) ++increases;
  out.require(tau_mismatch == 0, std::to_string(tau_mismatch) + " inconsistent steps");
  out.require(increases == 0, std::to_string(increases) + " increases of h");
  if (out.pass) out.detail = std::to_string(rep.iterations) + " logged steps";
  return out;
}

/// min over both hyperbola branches of |w - [1,1]|^2, by scan plus golden section.
double hyperbola_min_f() {
  auto f = [](double sign, double t) {
    return std::pow(sign * std::cosh(t) - 1.0, 2) + std::pow(std::sinh(t) - 1.0, 2);
  };
  double best = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    double t_best = 0.0, f_best = f(sign, 0.0);
    for (int i = -4000; i <= 4000; ++i) {
      const double t = i * 1e-3;
      if (f(sign, t) < f_best) {
        f_best = f(sign, t);
        t_best = t;
      }
    }
    double a = t_best - 1e-3, b = t_best + 1e-3;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 200; ++i) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (f(sign, c) < f(sign, d)) b = d;
      else a = c;
    }
    best = std::min({best, f_best, f(sign, 0.5 * (a + b))});
  }
  return best;
}

Outcome contour() {
  Outcome out;
  app::ContourConfig cfg;
  cfg.beta = 1.0;
  std::ostringstream csv;
  app::emit_contour(cfg, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  out.require(line == "x,y,h,phi", "bad header");
  double h_min = std::numeric_limits<double>::infinity();
  double phi_min = h_min;
  double nearest = h_min;
  std::pair<double, double> nearest_pt{0, 0};
  std::vector<std::pair<double, double>> nan_pts;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string f[4];
    for (auto& s : f) std::getline(ls, s, ',');
    const double x = std::stod(f[0]), y = std::stod(f[1]), h = std::stod(f[2]);
    ++rows;
    h_min = std::min(h_min, h);
    if (f[3] == "nan") nan_pts.emplace_back(x, y);
    else phi_min = std::min(phi_min, std::stod(f[3]));
    if (std::hypot(x, y) < nearest) {
      nearest = std::hypot(x, y);
      nearest_pt = {x, y};
    }
  }
  const double f_star = hyperbola_min_f();
  out.require(rows == cfg.nx * cfg.ny, "row count " + std::to_string(rows));
  out.require(h_min >= 0.0, "h min " + fmt(h_min));
  out.require(phi_min < f_star, "phi min " + fmt(phi_min) + " vs f* " + fmt(f_star));
  out.require(nan_pts.size() == 1 && nan_pts[0] == nearest_pt,
              std::to_string(nan_pts.size()) + " nan points");
  if (out.pass)
    out.detail = "h min " + fmt(h_min) + ", phi min " + fmt(phi_min) + " < f* " + fmt(f_star) +
                 ", nan at (" + fmt(nearest_pt.first) + ", " + fmt(nearest_pt.second) + ")";
  return out;
}

Outcome beta_estimator() {
  Outcome out;
  const PenaltyConfig cfg;  // N = 20, safety 2.5, radius 1, floor 1e-10
  const ProblemInstance nsm = nsm_problem(10, 2, 0);
  Rng a(7), b(7);
  const double ba = estimate_beta(nsm.spec, nsm.objective, nsm.initial_point, cfg, a);
  const double bb = estimate_beta(nsm.spec, nsm.objective, nsm.initial_point, cfg, b);
  out.require(ba == bb && std::isfinite(ba) && ba > 0.0, "nsm estimate not deterministic");

  Objective constant;
  constant.value = [](const Vector&) { return 1.5; };
  constant.gradient = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  Rng c(7);
  const double bc = estimate_beta(nsm.spec, constant, nsm.initial_point, cfg, c);
  out.require(bc == 0.0, "constant objective gave " + fmt(bc));

  // Hyperbola: the formula evaluated by hand over the same 20 samples.
  const ProblemInstance hyp = hyperbola2d_problem();
  Rng r1(0), r2(0);
  const double library = estimate_beta(hyp.spec, hyp.objective, hyp.initial_point, cfg, r1);
  const auto samples = sample_ball(hyp.initial_point, cfg.radius, cfg.n_samples, r2);
  auto cval = [](double x, double y) { return x * x - y * y - 1.0; };
  auto op = [&](double& x, double& y) {
    const double s = 1.0 - 0.5 * cval(x, y);
    x *= s;
    y *= s;
  };
  auto fval = [](double x, double y) { return (x - 1) * (x - 1) + (y - 1) * (y - 1); };
  double worst = 0.0;
  for (const Vector& xi : samples) {
    double x1 = xi(0), y1 = xi(1);
    op(x1, y1);
    double x2 = x1, y2 = y1;
    op(x2, y2);
    const double num = fval(x2, y2) - fval(x1, y1);
    const double c0 = cval(xi(0), xi(1)), c1 = cval(x1, y1);
    const double den = std::abs(c0 * c0 - c1 * c1) + 1e-10;
    worst = std::max({worst, num / den, 0.0});
  }
  const double scripted = 2.0 * 2.5 * worst;
  const double diff = std::abs(library - scripted);
  out.require(diff <= 1e-12 * std::max(1.0, std::abs(scripted)),
              "hyperbola " + fmt(library) + " vs " + fmt(scripted));
  if (out.pass)
    out.detail = "nsm beta " + fmt(ba) + ", hyperbola beta " + fmt(library) + " (diff " +
                 fmt(diff) + ")";
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  std::string traces;
  const std::vector<Criterion> criteria = {
      {1, "operator_axioms", 10.0, operator_axioms},
      {2, "quadratic_feasibility_decrease", 5.0, quadratic_decrease},
      {3, "derivative_exactness", 10.0, derivative_exactness},
      {4, "post_processing_rate", 1.0, [&] { return post_processing_rate(traces); }},
      {5, "end_to_end_nsm", 30.0, end_to_end_nsm},
      {6, "geneig_global_value", 60.0, geneig_global},
      {7, "crm_mechanics", 5.0, crm_mechanics},
      {8, "contour_reproduction", 2.0, contour},
      {9, "beta_estimator", 1.0, beta_estimator},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += " [over budget " + fmt(c.budget_s) + " s]";
    }
    std::printf("%s %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    if (c.id == 4) std::printf("%s", traces.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
