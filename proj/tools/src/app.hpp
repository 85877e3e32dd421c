#pragma once

#include <cdopt/cdf.hpp>
#include <cdopt/problems.hpp>
#include <cdopt/solvers.hpp>
#include <cdopt/verify.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace cdopt::app {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kStagnation = 2,
  kUsage = 64,
};

enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::string problem;
  /// Zero selects the problem default.
  Index m = 0;
  Index s = 0;
  double density = 0.01;
  double theta = 0.5;
  /// Optional NCM inputs; when set, G (and H) are read instead of generated.
  std::string g_file;
  std::string h_file;
  std::uint64_t seed = 0;

  SolverKind solver = SolverKind::Lbfgs;
  std::optional<double> beta;
  bool beta_auto = false;
  PenaltyConfig penalty;

  double tol_grad = 1e-5;
  double tol_feas = 1e-12;
  int max_iter = 10000;
  double max_time = 1200.0;

  OutputFormat format = OutputFormat::Json;
  std::string out;

  /// Throws ArgumentError unless exactly one beta mode is set and tolerances are positive.
  void validate() const;
};

ProblemInstance build_problem(const RunConfig& cfg);

struct BenchResult {
  std::string problem;
  std::string solver;
  double beta = 0.0;
  /// Objective at the post-processed point.
  double fval = 0.0;
  int iter = 0;
  int nfev = 0;
  int ngev = 0;
  /// |grad h| where the solver stopped.
  double gradnorm = 0.0;
  /// |c| after post-processing.
  double feas = 0.0;
  double wall_time_s = 0.0;
  double cpu_time_s = 0.0;
  std::uint64_t seed = 0;
  Vector x;
  SolveStatus status = SolveStatus::Converged;
  bool stagnated = false;
  std::string message;

  int exit_code() const;
};

BenchResult run_bench(const RunConfig& cfg);

std::string format_json(const BenchResult& r);
/// Header "Fval,Iter,Obj_eval,Grad,Feas,CPU time" followed by one row.
std::string format_csv(const BenchResult& r);

/// Writes JSON lines for every check; returns 0 iff all pass, else 1.
int run_verify(const VerifyOptions& options, std::ostream& out);

struct ContourConfig {
  double xmin = 0.0;
  double xmax = 2.0;
  double ymin = -0.5;
  double ymax = 1.5;
  int nx = 81;
  int ny = 81;
  double beta = 1.0;

  void validate() const;
};

/// Fletcher's penalty f - u^T c + beta/2 |c|^2 with u the least-squares
/// multiplier; NaN where the constraint gradient vanishes.
double fletcher_penalty(const ProblemInstance& p, const Vector& w, double beta);

/// CSV "x,y,h,phi" over the grid for the hyperbola2d instance.
void emit_contour(const ContourConfig& cfg, std::ostream& out);

}  // namespace cdopt::app
