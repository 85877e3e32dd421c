#pragma once

#include <cdopt/solvers.hpp>

#include <chrono>
#include <cmath>
#include <string>

namespace cdopt::detail {

/// Wraps an Objective and counts contract invocations.
class Evaluator {
 public:
  explicit Evaluator(const Objective& f) : f_(f) {}

  double value(const Vector& x) {
    ++nfev;
    const double v = f_.value(x);
    return v;
  }
  Vector gradient(const Vector& x) {
    ++ngev;
    return f_.gradient(x);
  }
  Vector hess_vec(const Vector& x, const Vector& d) {
    ++nhev;
    return f_.hess_vec(x, d);
  }

  /// Counting view for helpers that take an Objective. Must not outlive *this.
  Objective counted() {
    Objective o;
    o.value = [this](const Vector& x) { return value(x); };
    o.gradient = [this](const Vector& x) { return gradient(x); };
    if (f_.hess_vec) o.hess_vec = [this](const Vector& x, const Vector& d) { return hess_vec(x, d); };
    return o;
  }

  int nfev = 0;
  int ngev = 0;
  int nhev = 0;

 private:
  const Objective& f_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Accumulates the report while a solver runs.
struct Progress {
  Progress(Evaluator& ev, const SolveConfig& cfg) : ev(ev), cfg(cfg) {}

  void start(const Vector& x, double f, double gnorm) {
    report.x = x;
    report.fval = f;
    report.grad_norm = gnorm;
  }

  /// Completes one iteration at the new accepted iterate.
  void record(const Vector& x, double f, double gnorm) {
    start(x, f, gnorm);
    ++report.iterations;
    if (cfg.capture_history) report.history.push_back({f, gnorm});
  }

  SolveReport finish(SolveStatus status) {
    report.status = status;
    report.nfev = ev.nfev;
    report.ngev = ev.ngev;
    report.nhev = ev.nhev;
    report.wall_time = clock.seconds();
    return report;
  }

  /// Returns the terminal status, or nullopt to keep iterating.
  std::optional<SolveStatus> should_stop() const {
    if (report.grad_norm <= cfg.grad_tol) return SolveStatus::Converged;
    if (report.iterations >= cfg.max_iter) return SolveStatus::MaxIterations;
    if (clock.seconds() >= cfg.max_time) return SolveStatus::MaxTime;
    return std::nullopt;
  }

  [[noreturn]] void stagnate(const std::string& why) {
    throw StagnationError(why, finish(SolveStatus::MaxIterations));
  }

  Evaluator& ev;
  const SolveConfig& cfg;
  Stopwatch clock;
  SolveReport report;
};

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " is not finite");
}

}  // namespace cdopt::detail
