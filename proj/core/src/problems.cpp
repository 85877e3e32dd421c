#include <cdopt/errors.hpp>
#include <cdopt/problems.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_set>

namespace cdopt {
namespace {

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix G(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

/// Symmetric matrix with off-diagonal entries drawn from [lo, hi).
Matrix symmetric_uniform(Index m, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> uniform(lo, hi);
  Matrix S(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i <= j; ++i) S(i, j) = S(j, i) = uniform(rng);
  return S;
}

SparseMatrix sparse_symmetric(Index m, double density, Rng& rng) {
  const auto target = static_cast<std::size_t>(std::llround(density * double(m) * double(m)));
  std::uniform_int_distribution<Index> pick(0, m * m - 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::unordered_set<Index> used;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * target);
  while (used.size() < target) {
    const Index pos = pick(rng);
    if (!used.insert(pos).second) continue;
    const double v = 0.5 * uniform(rng);
    t.emplace_back(pos % m, pos / m, v);
    t.emplace_back(pos / m, pos % m, v);
  }
  SparseMatrix S(m, m);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

double spectral_norm(const SparseMatrix& S) {
  if (S.nonZeros() == 0) return 0.0;
  const Vector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(Matrix(S), Eigen::EigenvaluesOnly).eigenvalues();
  return ev.cwiseAbs().maxCoeff();
}

Vector initial_point(const ManifoldSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "initial_point"));
  return sample_feasible(spec, rng);
}

#ifndef NDEBUG
/// Construction-time sanity check on hand-written derivatives.
void debug_check_gradient(const ProblemInstance& p) {
  Rng rng(derive_seed(p.seed, "debug_check"));
  std::normal_distribution<double> normal;
  for (int k = 0; k < 3; ++k) {
    Vector x = sample_feasible(p.spec, rng);
    Vector d(x.size());
    for (Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
    d.normalize();
    const double h = 1e-5;
    const double fd = (p.objective.value(x + h * d) - p.objective.value(x - h * d)) / (2 * h);
    const double an = p.objective.gradient(x).dot(d);
    if (std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an)))
      throw Error(p.name + ": objective gradient fails the finite-difference check");
  }
}
#endif

ProblemInstance finalize(ProblemInstance p) {
#ifndef NDEBUG
  debug_check_gradient(p);
#endif
  return p;
}

}  // namespace

ProblemInstance nsm_problem(Index m, Index s, std::uint64_t seed) {
  if (!(m >= s && s >= 1)) throw ArgumentError("nsm requires m >= s >= 1");
  Rng rng(derive_seed(seed, "nsm"));
  Vector target = flatten(gaussian(2 * m, 2 * s, rng));
  target /= target.norm();

  Objective f;
  f.value = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  f.gradient = [target](const Vector& x) -> Vector { return x - target; };
  f.hess_vec = [](const Vector&, const Vector& d) -> Vector { return d; };

  ManifoldSpec spec = ManifoldSpec::symplectic_stiefel(m, s);
  Vector x0 = initial_point(spec, seed);
  return finalize({"nsm", std::move(spec), std::move(f), std::nullopt, seed, std::move(x0)});
}

GenEigData geneig_matrices(Index m, double density, std::uint64_t seed) {
  if (m < 2) throw ArgumentError("geneig requires m >= 2");
  if (!(density > 0.0 && density <= 1.0)) throw ArgumentError("density must lie in (0, 1]");
  Rng rng(derive_seed(seed, "geneig"));
  GenEigData data;
  data.A = sparse_symmetric(m, density, rng);
  data.B = sparse_symmetric(m, density, rng);
  if (const double na = spectral_norm(data.A); na > 0.0) data.A /= na;
  if (const double nb = spectral_norm(data.B); nb > 0.0) data.B /= nb;
  SparseMatrix I(m, m);
  I.setIdentity();
  data.B = 1.1 * I + data.B;
  data.A.makeCompressed();
  data.B.makeCompressed();
  return data;
}

ProblemInstance geneig_problem(const GenEigData& data, Index s, std::uint64_t seed) {
  const Index m = data.A.rows();
  if (!(m > s && s >= 1)) throw ArgumentError("geneig requires m > s >= 1");
  const SparseMatrix A = data.A;

  Objective f;
  f.value = [A, m, s](const Vector& x) {
    const auto X = as_matrix(x, m, s);
    return -0.5 * (X.transpose() * (A * X)).trace();
  };
  f.gradient = [A, m, s](const Vector& x) -> Vector {
    return flatten(-(A * as_matrix(x, m, s)));
  };
  f.hess_vec = [A, m, s](const Vector&, const Vector& d) -> Vector {
    return flatten(-(A * as_matrix(d, m, s)));
  };

  ManifoldSpec spec = ManifoldSpec::generalized_stiefel(data.B, s);
  std::optional<double> optimum;
  if (m <= 400) optimum = -0.5 * geneig_dense_oracle(Matrix(data.A), Matrix(data.B), s);
  Vector x0 = initial_point(spec, seed);
  return finalize({"geneig", std::move(spec), std::move(f), optimum, seed, std::move(x0)});
}

ProblemInstance geneig_problem(Index m, Index s, double density, std::uint64_t seed) {
  if (!(m > s && s >= 1)) throw ArgumentError("geneig requires m > s >= 1");
  return geneig_problem(geneig_matrices(m, density, seed), s, seed);
}

double geneig_dense_oracle(const Matrix& A, const Matrix& B, Index s) {
  const Index m = A.rows();
  if (A.cols() != m || B.rows() != m || B.cols() != m)
    throw ArgumentError("geneig oracle: A and B must be square and of equal size");
  if (m > 400) throw ArgumentError("geneig oracle is limited to m <= 400");
  if (s < 1 || s > m) throw ArgumentError("geneig oracle: s must lie in [1, m]");
  Eigen::LLT<Matrix> llt(B);
  if (llt.info() != Eigen::Success) throw ArgumentError("geneig oracle: B is not positive definite");
  const Matrix& L = llt.matrixLLT();
  // C = L^{-1} A L^{-T}
  Matrix C = L.triangularView<Eigen::Lower>().solve(A);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose()).eval();
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(C, Eigen::EigenvaluesOnly).eigenvalues();
  return ev.tail(s).sum();
}

NcmData ncm_data(Index m, Index s, double theta, std::uint64_t seed) {
  if (!(m >= s && s >= 1)) throw ArgumentError("ncm requires m >= s >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ArgumentError("ncm theta must lie in [0, 1]");
  Rng rng(derive_seed(seed, "ncm"));
  const Index r = std::min(m, 2 * s);
  const Matrix L = gaussian(m, r, rng);
  Matrix G0 = L * L.transpose();
  const Vector scale = G0.diagonal().cwiseSqrt().cwiseInverse();
  G0 = scale.asDiagonal() * G0 * scale.asDiagonal();
  G0 = 0.5 * (G0 + G0.transpose()).eval();
  G0.diagonal().setOnes();

  Matrix E = symmetric_uniform(m, -1.0, 1.0, rng);
  E.diagonal().setOnes();
  Matrix H = symmetric_uniform(m, 0.0, 1.0, rng);
  return {(1.0 - theta) * G0 + theta * E, std::move(H)};
}

ProblemInstance ncm_problem(const Matrix& G, const Matrix& H, Index s, std::uint64_t seed) {
  const Index m = G.rows();
  if (G.cols() != m || H.rows() != m || H.cols() != m)
    throw ArgumentError("ncm: G and H must be square and of equal size");
  if (!(m >= s && s >= 1)) throw ArgumentError("ncm requires m >= s >= 1");
  const Matrix W = H.cwiseProduct(H);

  // With Y = X^T (s x m): f = 1/2 |H o (Y^T Y - G)|^2, grad = 2 Y (W o R).
  Objective f;
  f.value = [H, G, m, s](const Vector& y) {
    const auto Y = as_matrix(y, s, m);
    return 0.5 * H.cwiseProduct(Y.transpose() * Y - G).squaredNorm();
  };
  f.gradient = [W, G, m, s](const Vector& y) -> Vector {
    const auto Y = as_matrix(y, s, m);
    return flatten(2.0 * Y * W.cwiseProduct(Y.transpose() * Y - G));
  };
  f.hess_vec = [W, G, m, s](const Vector& y, const Vector& d) -> Vector {
    const auto Y = as_matrix(y, s, m);
    const auto D = as_matrix(d, s, m);
    const Matrix R = W.cwiseProduct(Y.transpose() * Y - G);
    const Matrix dR = W.cwiseProduct(D.transpose() * Y + Y.transpose() * D);
    return flatten(2.0 * (Y * dR + D * R));
  };

  ManifoldSpec spec = ManifoldSpec::oblique(s, m);
  Vector x0 = initial_point(spec, seed);
  return finalize({"ncm", std::move(spec), std::move(f), std::nullopt, seed, std::move(x0)});
}

ProblemInstance ncm_problem(Index m, Index s, double theta, std::uint64_t seed) {
  NcmData data = ncm_data(m, s, theta, seed);
  return ncm_problem(data.G, data.H, s, seed);
}

Matrix read_dense_matrix(std::istream& in) {
  long long m = 0;
  if (!(in >> m) || m < 1) throw ArgumentError("dense matrix file: expected a positive size m");
  Matrix G(m, m);
  for (long long i = 0; i < m; ++i)
    for (long long j = 0; j < m; ++j)
      if (!(in >> G(i, j)))
        throw ArgumentError("dense matrix file: expected " + std::to_string(m * m) + " entries");
  return G;
}

Matrix load_dense_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open matrix file " + path);
  return read_dense_matrix(in);
}

ProblemInstance hyperbola2d_problem() {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 1.0;
  C(1, 1) = -1.0;
  const Vector anchor = Vector::Ones(2);

  Objective f;
  f.value = [anchor](const Vector& w) { return (w - anchor).squaredNorm(); };
  f.gradient = [anchor](const Vector& w) -> Vector { return 2.0 * (w - anchor); };
  f.hess_vec = [](const Vector&, const Vector& d) -> Vector { return 2.0 * d; };

  ManifoldSpec spec = ManifoldSpec::hyperbolic(C, 1);
  Vector x0(2);
  x0 << 1.0, 0.0;
  return finalize({"hyperbola2d", std::move(spec), std::move(f), std::nullopt, 0, std::move(x0)});
}

}  // namespace cdopt
