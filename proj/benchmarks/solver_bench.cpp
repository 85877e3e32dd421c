#include <cdopt/cdf.hpp>
#include <cdopt/problems.hpp>
#include <cdopt/solvers.hpp>

#include <benchmark/benchmark.h>

using namespace cdopt;

static void BM_SolveNsm(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const ProblemInstance p = nsm_problem(20, 2, 0);
  const Objective h = cdf_objective(CdfInstance(p.spec, p.objective, 2.0));
  int iterations = 0;
  for (auto _ : state) {
    const SolveReport r = solve(kind, h, p.initial_point, SolveConfig{});
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.x.data());
  }
  state.SetLabel(std::string(to_string(kind)));
  state.counters["iterations"] = iterations;
}
BENCHMARK(BM_SolveNsm)
    ->Arg(static_cast<int>(SolverKind::Lbfgs))
    ->Arg(static_cast<int>(SolverKind::ConjugateGradient))
    ->Arg(static_cast<int>(SolverKind::TrustRegionNewtonCg))
    ->Arg(static_cast<int>(SolverKind::CubicMomentum))
    ->Unit(benchmark::kMillisecond);
