#include "app.hpp"

#include <cdopt/errors.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace cdopt;
using namespace cdopt::app;

namespace {

const std::map<std::string, OutputFormat> kFormats = {
    {"json", OutputFormat::Json},
    {"csv", OutputFormat::Csv},
};

const std::map<std::string, VerifyFault> kFaults = {
    {"none", VerifyFault::None},
    {"operator-shift", VerifyFault::OperatorShift},
    {"drop-penalty-grad", VerifyFault::DropPenaltyGradient},
};

/// Writes to the file, or to stdout when path is empty.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open output file " + path);
  f << text;
}

std::vector<ManifoldKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ManifoldKind> kinds;
  for (const std::string& name : names) {
    const auto kind = parse_manifold_kind(name);
    if (!kind) throw ArgumentError("unknown manifold kind '" + name + "'");
    kinds.push_back(*kind);
  }
  return kinds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint dissolving optimization: benchmarks, verification and contour data"};
  app.require_subcommand(1);

  RunConfig run;
  double beta = 0.0;
  std::string solver = "lbfgs";
  auto* bench = app.add_subcommand("bench", "Solve a benchmark problem end to end");
  bench->add_option("problem", run.problem, "nsm | geneig | ncm | hyperbola2d")
      ->required()
      ->check(CLI::IsMember({"nsm", "geneig", "ncm", "hyperbola2d"}));
  bench->add_option("--m", run.m, "Problem size m");
  bench->add_option("--s", run.s, "Problem size s");
  bench->add_option("--density", run.density, "geneig sparsity density");
  bench->add_option("--theta", run.theta, "ncm perturbation weight");
  bench->add_option("--g-file", run.g_file, "ncm target matrix file")->check(CLI::ExistingFile);
  bench->add_option("--h-file", run.h_file, "ncm weight matrix file")->check(CLI::ExistingFile);
  bench->add_option("--solver", solver, "lbfgs | cg | trncg | crm")
      ->check(CLI::IsMember({"lbfgs", "cg", "trncg", "crm"}));
  auto* beta_opt = bench->add_option("--beta", beta, "Fixed penalty parameter");
  auto* beta_auto = bench->add_flag("--beta-auto", run.beta_auto, "Estimate beta by sampling");
  beta_opt->excludes(beta_auto);
  bench->add_option("--tol-grad", run.tol_grad, "Gradient tolerance on h");
  bench->add_option("--tol-feas", run.tol_feas, "Feasibility tolerance for post-processing");
  bench->add_option("--max-iter", run.max_iter, "Iteration limit");
  bench->add_option("--max-time", run.max_time, "Time budget in seconds");
  bench->add_option("--seed", run.seed, "Random seed");
  bench->add_option("--out", run.out, "Output path (stdout when omitted)");
  bench->add_option("--format", run.format, "json | csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  VerifyOptions vopt;
  std::vector<std::string> kind_names;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run the numerical verification suite");
  verify->add_option("--seed", vopt.master_seed, "Master seed");
  verify->add_option("--kinds", kind_names, "Manifold kinds to check (default: all)")
      ->delimiter(',');
  verify->add_option("--out", verify_out, "JSON-lines output path (stdout when omitted)");
  verify->add_option("--inject-fault", vopt.fault, "none | operator-shift | drop-penalty-grad")
      ->transform(CLI::CheckedTransformer(kFaults, CLI::ignore_case));

  ContourConfig ccfg;
  std::string contour_out;
  auto* contour = app.add_subcommand("contour", "Emit h and Fletcher penalty grids for hyperbola2d");
  contour->add_option("--xmin", ccfg.xmin);
  contour->add_option("--xmax", ccfg.xmax);
  contour->add_option("--ymin", ccfg.ymin);
  contour->add_option("--ymax", ccfg.ymax);
  contour->add_option("--nx", ccfg.nx);
  contour->add_option("--ny", ccfg.ny);
  contour->add_option("--beta", ccfg.beta);
  contour->add_option("--out", contour_out, "CSV output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kUsage;
  }

  try {
    if (*bench) {
      if (*beta_opt) run.beta = beta;
      run.solver = *parse_solver_kind(solver);
      const BenchResult r = run_bench(run);
      write_output(run.out, run.format == OutputFormat::Json ? format_json(r) : format_csv(r));
      if (!r.message.empty()) std::cerr << "cdopt: " << r.message << '\n';
      return r.exit_code();
    }
    if (*verify) {
      vopt.kinds = parse_kinds(kind_names);
      std::ostringstream os;
      const int rc = run_verify(vopt, os);
      write_output(verify_out, os.str());
      return rc;
    }
    std::ostringstream os;
    emit_contour(ccfg, os);
    write_output(contour_out, os.str());
    return kSuccess;
  } catch (const ArgumentError& e) {
    std::cerr << "cdopt: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "cdopt: " << e.what() << '\n';
    return kStagnation;
  }
}
