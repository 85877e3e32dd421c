#include "app.hpp"

#include <cdopt/errors.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>

namespace cdopt::app {

void RunConfig::validate() const {
  if (beta.has_value() == beta_auto)
    throw ArgumentError("exactly one of --beta and --beta-auto must be given");
  if (beta && !(*beta > 0.0)) throw ArgumentError("beta must be positive");
  if (!(tol_grad > 0.0) || !(tol_feas > 0.0)) throw ArgumentError("tolerances must be positive");
  if (max_iter < 1) throw ArgumentError("max-iter must be at least 1");
  if (!(max_time > 0.0)) throw ArgumentError("max-time must be positive");
  penalty.validate();
}

ProblemInstance build_problem(const RunConfig& cfg) {
  auto dim = [](Index v, Index fallback) { return v > 0 ? v : fallback; };
  if (cfg.problem == "nsm") return nsm_problem(dim(cfg.m, 50), dim(cfg.s, 5), cfg.seed);
  if (cfg.problem == "geneig")
    return geneig_problem(dim(cfg.m, 100), dim(cfg.s, 5), cfg.density, cfg.seed);
  if (cfg.problem == "ncm") {
    if (cfg.g_file.empty()) return ncm_problem(dim(cfg.m, 100), dim(cfg.s, 5), cfg.theta, cfg.seed);
    const Matrix G = load_dense_matrix(cfg.g_file);
    Matrix H = cfg.h_file.empty() ? Matrix::Ones(G.rows(), G.cols()) : load_dense_matrix(cfg.h_file);
    return ncm_problem(G, H, dim(cfg.s, 5), cfg.seed);
  }
  if (cfg.problem == "hyperbola2d") return hyperbola2d_problem();
  throw ArgumentError("unknown problem '" + cfg.problem + "'");
}

int BenchResult::exit_code() const {
  return stagnated || status != SolveStatus::Converged ? kStagnation : kSuccess;
}

BenchResult run_bench(const RunConfig& cfg) {
  cfg.validate();
  const auto wall0 = std::chrono::steady_clock::now();
  const std::clock_t cpu0 = std::clock();

  const ProblemInstance p = build_problem(cfg);
  BenchResult r;
  r.problem = cfg.problem;
  r.solver = std::string(to_string(cfg.solver));
  r.seed = cfg.seed;
  if (cfg.beta_auto) {
    Rng rng(derive_seed(cfg.seed, "beta"));
    // A constant objective yields 0; keep the CDF well defined.
    r.beta = std::max(estimate_beta(p.spec, p.objective, p.initial_point, cfg.penalty, rng),
                      cfg.penalty.floor);
  } else {
    r.beta = *cfg.beta;
  }

  const CdfInstance inst(p.spec, p.objective, r.beta);
  SolveConfig sc;
  sc.grad_tol = cfg.tol_grad;
  sc.max_iter = cfg.max_iter;
  sc.max_time = cfg.max_time;

  SolveReport rep;
  try {
    rep = solve(cfg.solver, cdf_objective(inst), p.initial_point, sc, CrmConfig{});
  } catch (const StagnationError& e) {
    rep = e.report();
    r.stagnated = true;
    r.message = e.what();
  }
  r.iter = rep.iterations;
  r.nfev = rep.nfev;
  r.ngev = rep.ngev;
  r.gradnorm = rep.grad_norm;
  r.status = rep.status;

  r.x = rep.x;
  try {
    r.x = post_process(p.spec, rep.x, cfg.tol_feas).x;
  } catch (const Error& e) {
    r.stagnated = true;
    if (r.message.empty()) r.message = e.what();
  }
  r.feas = feasibility(p.spec, r.x);
  r.fval = p.objective.value(r.x);

  r.cpu_time_s = double(std::clock() - cpu0) / CLOCKS_PER_SEC;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return r;
}

std::string format_json(const BenchResult& r) {
  nlohmann::ordered_json j;
  j["problem"] = r.problem;
  j["solver"] = r.solver;
  j["beta"] = r.beta;
  j["fval"] = r.fval;
  j["iter"] = r.iter;
  j["nfev"] = r.nfev;
  j["ngev"] = r.ngev;
  j["gradnorm"] = r.gradnorm;
  j["feas"] = r.feas;
  j["wall_time_s"] = r.wall_time_s;
  j["seed"] = r.seed;
  return j.dump() + "\n";
}

std::string format_csv(const BenchResult& r) {
  char row[256];
  std::snprintf(row, sizeof row, "%.10e,%d,%d,%.10e,%.10e,%.6f\n", r.fval, r.iter, r.nfev,
                r.gradnorm, r.feas, r.cpu_time_s);
  return std::string("Fval,Iter,Obj_eval,Grad,Feas,CPU time\n") + row;
}

int run_verify(const VerifyOptions& options, std::ostream& out) {
  bool ok = true;
  for (const CheckReport& r : run_verification_suite(options)) {
    out << to_json_line(r) << '\n';
    ok = ok && r.pass;
  }
  return ok ? kSuccess : kVerificationFailure;
}

void ContourConfig::validate() const {
  if (!(xmin < xmax) || !(ymin < ymax)) throw ArgumentError("contour window is empty");
  if (nx < 2 || ny < 2) throw ArgumentError("contour grid needs at least 2 points per axis");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
}

double fletcher_penalty(const ProblemInstance& p, const Vector& w, double beta) {
  const Matrix J = constraint_jacobian(p.spec, w);
  const Vector c = constraint_eval(p.spec, w);
  const Vector g = p.objective.gradient(w);
  const Vector sigma = Eigen::JacobiSVD<Matrix>(J).singularValues();
  if (!(sigma(sigma.size() - 1) > 1e-12)) return std::nan("");
  const Vector u = J.householderQr().solve(g);
  return p.objective.value(w) - u.dot(c) + 0.5 * beta * c.squaredNorm();
}

void emit_contour(const ContourConfig& cfg, std::ostream& out) {
  cfg.validate();
  const ProblemInstance p = hyperbola2d_problem();
  const CdfInstance inst(p.spec, p.objective, cfg.beta);
  out << "x,y,h,phi\n";
  char line[160];
  Vector w(2);
  for (int j = 0; j < cfg.ny; ++j) {
    w(1) = cfg.ymin + (cfg.ymax - cfg.ymin) * j / (cfg.ny - 1);
    for (int i = 0; i < cfg.nx; ++i) {
      w(0) = cfg.xmin + (cfg.xmax - cfg.xmin) * i / (cfg.nx - 1);
      const double phi = fletcher_penalty(p, w, cfg.beta);
      const double h = cdf_value(inst, w);
      if (std::isnan(phi))
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,nan\n", w(0), w(1), h);
      else
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", w(0), w(1), h, phi);
      out << line;
    }
  }
}

}  // namespace cdopt::app
