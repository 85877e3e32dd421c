#include <cdopt/errors.hpp>
#include <cdopt/problems.hpp>
#include <cdopt/verify.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace cdopt {

void CheckReport::expect_le(const std::string& key, double value, double allowed) {
  auto [it, inserted] = measured.emplace(key, value);
  if (!inserted && !(it->second >= value)) it->second = value;
  double ratio;
  if (std::isnan(value))
    ratio = std::numeric_limits<double>::infinity();
  else if (allowed > 0.0)
    ratio = value / allowed;
  else
    ratio = value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  worst = std::max(worst, ratio);
  pass = pass && ratio <= 1.0;
}

std::string to_json_line(const CheckReport& r) {
  auto number = [](double v) -> std::string {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  std::ostringstream os;
  os << "{\"name\":\"" << r.name << "\",\"pass\":" << (r.pass ? "true" : "false")
     << ",\"worst\":" << number(r.worst) << ",\"tol\":" << number(r.tol) << ",\"n\":" << r.n
     << "}";
  return os.str();
}

namespace {

Vector unit_gaussian(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = normal(rng);
  return d / d.norm();
}

Matrix dense_operator_adjoint(const ManifoldSpec& spec, const Vector& x) {
  const Index n = spec.dim();
  Matrix JA(n, n);
  for (Index i = 0; i < n; ++i) JA.col(i) = operator_adjoint_apply(spec, x, Vector::Unit(n, i));
  return JA;
}

/// Slope of the least-squares line through (u_i, v_i).
double fit_slope(const std::vector<double>& u, const std::vector<double>& v) {
  const double n = double(u.size());
  double mu = 0, mv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - mu) * (v[i] - mv);
    den += (u[i] - mu) * (u[i] - mu);
  }
  return num / den;
}

double fd_step(const Vector& x) { return std::cbrt(DBL_EPSILON) * (1.0 + x.norm()); }

Vector perturb(const Vector& x, Rng& rng) {
  return x + 0.1 * (1.0 + x.norm()) * unit_gaussian(x.size(), rng);
}

class ShiftedModel final : public ManifoldModel {
 public:
  ShiftedModel(ManifoldSpec base, double eps) : base_(std::move(base)), eps_(eps) {}

  ManifoldKind kind() const override { return m().kind(); }
  Index rows() const override { return m().rows(); }
  Index cols() const override { return m().cols(); }
  Index constraint_dim() const override { return m().constraint_dim(); }
  Vector constraint(const Vector& x) const override { return m().constraint(x); }
  Vector jac_apply(const Vector& x, const Vector& v) const override { return m().jac_apply(x, v); }
  Vector jac_adjoint_apply(const Vector& x, const Vector& d) const override {
    return m().jac_adjoint_apply(x, d);
  }
  Vector jac_diff_apply(const Vector& x, const Vector& d, const Vector& w) const override {
    return m().jac_diff_apply(x, d, w);
  }
  Vector op_apply(const Vector& x) const override {
    return m().op_apply(x) + Vector::Constant(x.size(), eps_);
  }
  Vector op_diff(const Vector& x, const Vector& d) const override { return m().op_diff(x, d); }
  Vector op_adjoint_apply(const Vector& x, const Vector& v) const override {
    return m().op_adjoint_apply(x, v);
  }
  Vector op_adjoint_diff_apply(const Vector& x, const Vector& d, const Vector& v) const override {
    return m().op_adjoint_diff_apply(x, d, v);
  }
  bool has_sampler() const override { return m().has_sampler(); }
  Vector sample_feasible(Rng& rng) const override { return m().sample_feasible(rng); }

 private:
  const ManifoldModel& m() const { return base_.model(); }
  ManifoldSpec base_;
  double eps_;
};

}  // namespace

ManifoldSpec with_operator_shift(const ManifoldSpec& spec, double eps) {
  return ManifoldSpec(std::make_shared<ShiftedModel>(spec, eps));
}

CheckReport check_operator_axioms(const ManifoldSpec& spec, int n_points, double tol, Rng& rng) {
  if (n_points < 1) throw ArgumentError("check_operator_axioms needs n_points >= 1");
  if (!has_sampler(spec))
    throw CapabilityError("check_operator_axioms needs a feasible sampler");
  CheckReport r;
  r.name = "operator_axioms";
  r.tol = tol;
  r.n = n_points;
  for (int k = 0; k < n_points; ++k) {
    const Vector x = sample_feasible(spec, rng);
    const double scale = 1.0 + x.norm();
    r.expect_le("fixed_point", (operator_apply(spec, x) - x).norm(), 1e-12 * scale);

    const Matrix Jc = constraint_jacobian(spec, x);
    const Matrix JA = dense_operator_adjoint(spec, x);
    r.expect_le("null_composition", (JA * Jc).norm() / std::max(1.0, Jc.norm()), tol);
    r.expect_le("idempotence", (JA * JA - JA).norm() / std::max(1.0, JA.norm()), tol);

    const Matrix U = tangent_basis(spec, x);
    double tangent = 0.0;
    for (Index j = 0; j < U.cols(); ++j)
      tangent = std::max(tangent, (operator_diff(spec, x, U.col(j)) - U.col(j)).norm());
    r.expect_le("tangent_identity", tangent, tol);
  }
  return r;
}

CheckReport check_quadratic_decrease(const ManifoldSpec& spec, int n_points,
                                     const std::vector<double>& scales, Rng& rng) {
  if (n_points < 1) throw ArgumentError("check_quadratic_decrease needs n_points >= 1");
  if (scales.size() < 2) throw ArgumentError("check_quadratic_decrease needs at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] < scales[i - 1]))
      throw ArgumentError("check_quadratic_decrease scales must be strictly descending");
  if (!(scales.back() >= 1e-4)) throw ArgumentError("smallest scale must be at least 1e-4");
  if (!has_sampler(spec))
    throw CapabilityError("check_quadratic_decrease needs a feasible sampler");

  constexpr double floor = 1e-14;
  constexpr int max_resamples = 5;
  constexpr double kMaxResidual = 0.1;
  CheckReport r;
  r.name = "quadratic_decrease";
  r.tol = 0.2;
  r.n = n_points;
  double min_slope = std::numeric_limits<double>::infinity();
  double max_slope = -min_slope;
  double min_radius = std::numeric_limits<double>::infinity();
  int resamples = 0;
  int flagged = 0;

  for (int k = 0; k < n_points; ++k) {
    const Vector x = sample_feasible(spec, rng);
    const Matrix Jc = constraint_jacobian(spec, x);
    double radius = 1.0 + x.norm();
    bool accepted = false;
    for (int attempt = 0; attempt <= max_resamples && !accepted; ++attempt) {
      if (attempt > 0) {
        ++resamples;
        radius *= 0.1;
      }
      const Vector d = unit_gaussian(Jc.cols(), rng);
      Vector dir = Jc * d;
      dir /= dir.norm();
      std::vector<double> u, v;
      bool good = true;
      for (double t : scales) {
        const Vector y = x + (t * radius) * dir;
        const double cy = feasibility(spec, y);
        const double cay = feasibility(spec, operator_apply(spec, y));
        // Outside the good region: residual not small, or A fails to contract it.
        if (!(cy <= kMaxResidual) || !(cay <= 0.5 * cy)) {
          good = false;
          break;
        }
        if (cay < floor) continue;
        u.push_back(std::log(cy));
        v.push_back(std::log(cay));
      }
      if (!good) continue;
      accepted = true;
      min_radius = std::min(min_radius, scales.front() * radius);
      if (u.size() < 2) continue;  // residual at the absolute floor
      const double slope = fit_slope(u, v);
      min_slope = std::min(min_slope, slope);
      max_slope = std::max(max_slope, slope);
      r.expect_le("slope_deviation", std::abs(slope - 2.0), 0.2);
    }
    if (!accepted) {
      ++flagged;
      r.expect_le("outside_good_region", 1.0, 0.0);
    }
  }
  r.info["min_slope"] = min_slope;
  r.info["max_slope"] = max_slope;
  r.info["min_radius"] = min_radius;
  r.info["resamples"] = resamples;
  r.info["flagged"] = flagged;
  return r;
}

CheckReport check_gradient_fd(const ManifoldSpec& spec,
                              const std::function<double(const Vector&)>& value,
                              const std::function<Vector(const Vector&)>& gradient,
                              int n_points, double tol, Rng& rng) {
  if (n_points < 1) throw ArgumentError("check_gradient_fd needs n_points >= 1");
  CheckReport r;
  r.name = "gradient_fd";
  r.tol = tol;
  r.n = n_points;
  auto probe = [&](const Vector& x, const std::string& key) {
    const Vector g = gradient(x);
    const double h = fd_step(x);
    for (int j = 0; j < 2; ++j) {
      const Vector d = unit_gaussian(x.size(), rng);
      const double fd = (value(x + h * d) - value(x - h * d)) / (2.0 * h);
      r.expect_le(key, std::abs(fd - g.dot(d)) / std::max(1.0, g.norm()), tol);
    }
  };
  for (int k = 0; k < n_points; ++k) {
    const Vector x = sample_feasible(spec, rng);
    probe(x, "rel_error_feasible");
    probe(perturb(x, rng), "rel_error_perturbed");
  }
  return r;
}

CheckReport check_gradient_fd(const CdfInstance& inst, int n_points, double tol, Rng& rng) {
  return check_gradient_fd(
      inst.spec(), [&inst](const Vector& x) { return cdf_value(inst, x); },
      [&inst](const Vector& x) { return cdf_grad(inst, x); }, n_points, tol, rng);
}

CheckReport check_hess_fd(const CdfInstance& inst, int n_points, double tol, Rng& rng) {
  if (!inst.has_hessian()) throw CapabilityError("check_hess_fd needs a Hessian-vector path");
  if (n_points < 1) throw ArgumentError("check_hess_fd needs n_points >= 1");
  CheckReport r;
  r.name = "hess_fd";
  r.tol = tol;
  r.n = n_points;
  auto probe = [&](const Vector& x, const std::string& key) {
    const Vector d = unit_gaussian(x.size(), rng);
    const Vector hd = cdf_hess_vec(inst, x, d);
    const double h = fd_step(x);
    const Vector fd = (cdf_grad(inst, x + h * d) - cdf_grad(inst, x - h * d)) / (2.0 * h);
    r.expect_le(key, (fd - hd).norm() / std::max(1.0, hd.norm()), tol);

    const Vector u = unit_gaussian(x.size(), rng);
    const Vector hu = cdf_hess_vec(inst, x, u);
    const double pairing = std::abs(d.dot(hu) - u.dot(hd)) / std::max({1.0, hu.norm(), hd.norm()});
    r.expect_le("symmetry", pairing, 1e-8);
  };
  for (int k = 0; k < n_points; ++k) {
    const Vector x = sample_feasible(inst.spec(), rng);
    probe(x, "rel_error_feasible");
    probe(perturb(x, rng), "rel_error_perturbed");
  }
  return r;
}

CheckReport check_stationarity_transfer(const CdfInstance& inst, SolverKind solver,
                                        const Vector& x0, double tol_grad, Rng& rng) {
  if (!(tol_grad > 0.0)) throw ArgumentError("tol_grad must be positive");
  const ManifoldSpec& spec = inst.spec();
  const Vector start = x0.size() == 0 ? sample_feasible(spec, rng) : x0;

  SolveConfig cfg;
  cfg.grad_tol = tol_grad;
  cfg.capture_history = true;
  const Objective h = cdf_objective(inst);
  const SolveReport rep = solve(solver, h, start, cfg, CrmConfig{});

  CheckReport r;
  r.name = "stationarity_transfer";
  r.tol = tol_grad;
  r.n = 1;
  r.info["iterations"] = rep.iterations;
  r.info["cdf_grad_norm"] = rep.grad_norm;
  r.info["cdf_value"] = rep.fval;
  if (!rep.converged()) r.expect_le("not_converged", 1.0, 0.0);

  double increase = 0.0;
  double prev = h.value(start);
  for (const IterationRecord& rec : rep.history) {
    increase = std::max(increase, rec.fval - prev);
    prev = rec.fval;
  }
  r.expect_le("cdf_increase", increase, 0.0);

  try {
    const PostProcessResult pp = post_process(spec, rep.x, 1e-12);
    r.info["post_process_steps"] = pp.iterations;
    r.expect_le("feasibility", feasibility(spec, pp.x), 1e-12);
    const double rg = riemannian_grad(spec, inst.objective(), pp.x).norm();
    r.expect_le("riemannian_grad", rg, 2.0 * tol_grad + 1e-10);
    r.info["objective"] = inst.objective().value(pp.x);
  } catch (const Error& e) {
    r.expect_le("post_process_failed", 1.0, 0.0);
    r.note = e.what();
  }
  return r;
}

ManifoldSpec reference_manifold(ManifoldKind kind, int nu) {
  Rng rng(derive_seed(0, "reference_manifold"));
  std::normal_distribution<double> normal;
  auto gaussian = [&](Index rows, Index cols) {
    Matrix G(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
    return G;
  };
  switch (kind) {
    case ManifoldKind::Sphere: return ManifoldSpec::sphere(10);
    case ManifoldKind::Oblique: return ManifoldSpec::oblique(8, 4);
    case ManifoldKind::Stiefel: return ManifoldSpec::stiefel(10, 4);
    case ManifoldKind::Grassmann: return ManifoldSpec::grassmann(10, 4);
    case ManifoldKind::GeneralizedStiefel: {
      const Matrix G = gaussian(10, 10);
      return ManifoldSpec::generalized_stiefel(Matrix(G.transpose() * G / 10.0 + Matrix::Identity(10, 10)), 4);
    }
    case ManifoldKind::Hyperbolic: {
      const Matrix Q = gaussian(6, 6).householderQr().householderQ();
      Vector ev(6);
      ev << 2.0, 1.5, 1.0, -1.0, -1.5, -2.0;
      const Matrix B = Q * ev.asDiagonal() * Q.transpose();
      return ManifoldSpec::hyperbolic(Matrix(0.5 * (B + B.transpose())), 2);
    }
    case ManifoldKind::SymplecticStiefel: return ManifoldSpec::symplectic_stiefel(4, 2);
    case ManifoldKind::QuadraticLieGroup: return ManifoldSpec::quadratic_lie_group(6, nu);
    case ManifoldKind::Generic: {
      GenericConstraint c;
      c.dim = 1;
      c.value = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() - 1.0); };
      c.jac_apply = [](const Vector& x, const Vector& v) -> Vector { return 2.0 * v(0) * x; };
      c.jac_adjoint_apply = [](const Vector& x, const Vector& d) {
        return Vector::Constant(1, 2.0 * x.dot(d));
      };
      c.jac_diff_apply = [](const Vector&, const Vector& d, const Vector& w) -> Vector {
        return 2.0 * w(0) * d;
      };
      c.sampler = [](Rng& r) { return unit_gaussian(10, r); };
      return ManifoldSpec::generic(10, 1, std::move(c));
    }
  }
  throw ArgumentError("unknown manifold kind");
}

namespace {

/// f(x) = 1/2 x^T Q x + b^T x with Q symmetric.
Objective random_quadratic(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix Q(n, n);
  Vector b(n);
  for (Index j = 0; j < n; ++j) {
    b(j) = normal(rng);
    for (Index i = 0; i < n; ++i) Q(i, j) = normal(rng);
  }
  Q = (0.5 * (Q + Q.transpose())).eval();
  Objective f;
  f.value = [Q, b](const Vector& x) { return 0.5 * x.dot(Q * x) + b.dot(x); };
  f.gradient = [Q, b](const Vector& x) -> Vector { return Q * x + b; };
  f.hess_vec = [Q](const Vector&, const Vector& d) -> Vector { return Q * d; };
  return f;
}

struct Target {
  ManifoldKind kind;
  int nu;
  std::string label;
};

class Suite {
 public:
  explicit Suite(const VerifyOptions& opt) : opt_(opt) {}

  bool selected(ManifoldKind kind) const {
    return opt_.kinds.empty() ||
           std::find(opt_.kinds.begin(), opt_.kinds.end(), kind) != opt_.kinds.end();
  }

  Rng stream(const std::string& name) const { return Rng(derive_seed(opt_.master_seed, name)); }

  template <class F>
  void run(const std::string& name, F&& check) {
    Rng rng = stream(name);
    CheckReport r;
    try {
      r = check(rng);
    } catch (const Error& e) {
      r = CheckReport{};
      r.expect_le("exception", 1.0, 0.0);
      r.note = e.what();
    }
    r.name = name;
    out.push_back(std::move(r));
  }

  CdfInstance instance(const ManifoldSpec& spec, const Objective& f, double beta) const {
    return CdfInstance(spec, f, beta);
  }

  /// Gradient check honouring the DropPenaltyGradient fault.
  CheckReport gradient(const CdfInstance& inst, int n, double tol, Rng& rng) const {
    if (opt_.fault != VerifyFault::DropPenaltyGradient) return check_gradient_fd(inst, n, tol, rng);
    const ManifoldSpec& spec = inst.spec();
    return check_gradient_fd(
        spec, [&inst](const Vector& x) { return cdf_value(inst, x); },
        [&inst, &spec](const Vector& x) -> Vector {
          return cdf_grad(inst, x) -
                 inst.beta() * constraint_jac_apply(spec, x, constraint_eval(spec, x));
        },
        n, tol, rng);
  }

  const VerifyOptions& opt_;
  std::vector<CheckReport> out;
};

}  // namespace

std::vector<CheckReport> run_verification_suite(const VerifyOptions& options) {
  Suite suite(options);
  const std::vector<Target> targets = {
      {ManifoldKind::Sphere, 1, "sphere"},
      {ManifoldKind::Oblique, 1, "oblique"},
      {ManifoldKind::Stiefel, 1, "stiefel"},
      {ManifoldKind::GeneralizedStiefel, 1, "generalized_stiefel"},
      {ManifoldKind::Grassmann, 1, "grassmann"},
      {ManifoldKind::Hyperbolic, 1, "hyperbolic"},
      {ManifoldKind::SymplecticStiefel, 1, "symplectic"},
      {ManifoldKind::QuadraticLieGroup, 1, "lie_group_plus"},
      {ManifoldKind::QuadraticLieGroup, -1, "lie_group_minus"},
      {ManifoldKind::Generic, 1, "generic"},
  };

  for (const Target& t : targets) {
    if (!suite.selected(t.kind)) continue;
    ManifoldSpec spec = reference_manifold(t.kind, t.nu);
    if (options.fault == VerifyFault::OperatorShift) spec = with_operator_shift(spec, 1e-6);

    suite.run("operator_axioms/" + t.label,
              [&](Rng& rng) { return check_operator_axioms(spec, 20, 1e-8, rng); });
    suite.run("quadratic_decrease/" + t.label, [&](Rng& rng) {
      return check_quadratic_decrease(spec, 10, {1e-1, 1e-2, 1e-3}, rng);
    });
    suite.run("gradient_fd/" + t.label, [&](Rng& rng) {
      const CdfInstance inst(spec, random_quadratic(spec.dim(), rng), 1.0);
      return suite.gradient(inst, 5, 1e-5, rng);
    });
    suite.run("hess_fd/" + t.label, [&](Rng& rng) {
      const CdfInstance inst(spec, random_quadratic(spec.dim(), rng), 1.0);
      return check_hess_fd(inst, 5, 1e-4, rng);
    });
  }

  const std::uint64_t seed = options.master_seed;
  if (suite.selected(ManifoldKind::Hyperbolic)) {
    const ProblemInstance p = hyperbola2d_problem();
    const CdfInstance inst(p.spec, p.objective, 1.0);
    suite.run("gradient_fd/hyperbola2d",
              [&](Rng& rng) { return suite.gradient(inst, 10, 1e-6, rng); });
    suite.run("hess_fd/hyperbola2d", [&](Rng& rng) { return check_hess_fd(inst, 10, 1e-4, rng); });
    suite.run("stationarity_transfer/hyperbola2d_lbfgs", [&](Rng& rng) {
      return check_stationarity_transfer(inst, SolverKind::Lbfgs, p.initial_point, 1e-8, rng);
    });
  }
  if (suite.selected(ManifoldKind::SymplecticStiefel)) {
    const ProblemInstance p = nsm_problem(10, 2, seed);
    const CdfInstance inst(p.spec, p.objective, 2.0);
    suite.run("gradient_fd/nsm", [&](Rng& rng) { return suite.gradient(inst, 5, 1e-5, rng); });
    suite.run("hess_fd/nsm", [&](Rng& rng) { return check_hess_fd(inst, 5, 1e-4, rng); });
    suite.run("stationarity_transfer/nsm_crm", [&](Rng& rng) {
      return check_stationarity_transfer(inst, SolverKind::CubicMomentum, p.initial_point, 1e-5,
                                         rng);
    });
  }
  if (suite.selected(ManifoldKind::GeneralizedStiefel)) {
    const ProblemInstance p = geneig_problem(50, 3, 0.01, seed);
    const CdfInstance inst(p.spec, p.objective, 2.0);
    suite.run("gradient_fd/geneig", [&](Rng& rng) { return suite.gradient(inst, 5, 1e-5, rng); });
    suite.run("hess_fd/geneig", [&](Rng& rng) { return check_hess_fd(inst, 5, 1e-4, rng); });
    suite.run("stationarity_transfer/geneig_trncg", [&](Rng& rng) {
      CheckReport r = check_stationarity_transfer(inst, SolverKind::TrustRegionNewtonCg,
                                                  p.initial_point, 1e-5, rng);
      const auto it = r.info.find("objective");
      const double gap = it == r.info.end() ? std::numeric_limits<double>::quiet_NaN()
                                            : std::abs(it->second - *p.known_optimum);
      r.expect_le("oracle_gap", gap, 1e-6);
      return r;
    });
  }
  if (suite.selected(ManifoldKind::Oblique)) {
    const ProblemInstance p = ncm_problem(20, 3, 0.5, seed);
    const CdfInstance inst(p.spec, p.objective, 2.0);
    suite.run("gradient_fd/ncm", [&](Rng& rng) { return suite.gradient(inst, 5, 1e-5, rng); });
    suite.run("hess_fd/ncm", [&](Rng& rng) { return check_hess_fd(inst, 5, 1e-4, rng); });
  }
  return std::move(suite.out);
}

}  // namespace cdopt
