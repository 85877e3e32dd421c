#include <cdopt/errors.hpp>
#include <cdopt/manifolds.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace cdopt;
using namespace cdopt::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

class EveryKind : public ::testing::TestWithParam<Case> {};

}  // namespace

TEST(Constraint, SphereValue) {
  const auto sp = ManifoldSpec::sphere(2);
  EXPECT_EQ(constraint_eval(sp, vec({2, 0})), vec({3}));
  EXPECT_DOUBLE_EQ(feasibility(sp, vec({2, 0})), 3.0);
}

TEST(Constraint, StiefelUpperTriangle) {
  const auto st = ManifoldSpec::stiefel(3, 2);
  Matrix X = Matrix::Zero(3, 2);
  X(0, 0) = 2;
  X(1, 1) = 2;
  EXPECT_EQ(constraint_eval(st, flatten(X)), vec({3, 0, 3}));
  EXPECT_NEAR(feasibility(st, flatten(X)), 3.0 * std::sqrt(2.0), 1e-15);
}

TEST(Constraint, PackedDimensions) {
  EXPECT_EQ(ManifoldSpec::sphere(5).constraint_dim(), 1);
  EXPECT_EQ(ManifoldSpec::oblique(5, 3).constraint_dim(), 3);
  EXPECT_EQ(ManifoldSpec::stiefel(5, 3).constraint_dim(), 6);
  EXPECT_EQ(ManifoldSpec::symplectic_stiefel(4, 2).constraint_dim(), 6);
  EXPECT_EQ(ManifoldSpec::symplectic_stiefel(4, 2).rows(), 8);
  EXPECT_EQ(ManifoldSpec::quadratic_lie_group(6, 1).constraint_dim(), 21);
  EXPECT_EQ(ManifoldSpec::quadratic_lie_group(6, -1).constraint_dim(), 15);
}

TEST(Constraint, SphereJacobianExamples) {
  const auto sp = ManifoldSpec::sphere(2);
  EXPECT_EQ(constraint_jac_apply(sp, vec({2, 0}), vec({1})), vec({4, 0}));
  EXPECT_EQ(constraint_jac_adjoint_apply(sp, vec({1, 0}), vec({0, 1})), vec({0}));
  EXPECT_EQ(constraint_jac_adjoint_apply(sp, vec({1, 0}), vec({1, 0})), vec({2}));
  const Vector d = vec({0.3, -1.1});
  EXPECT_TRUE(constraint_jac_diff_apply(sp, vec({0.7, 0.2}), d, vec({1.5})).isApprox(3.0 * d));
}

TEST(Constraint, ShapeMismatchIsArgumentError) {
  const auto st = ManifoldSpec::stiefel(4, 2);
  EXPECT_THROW(constraint_eval(st, Vector::Zero(7)), ArgumentError);
  EXPECT_THROW(constraint_jac_apply(st, Vector::Zero(8), Vector::Zero(2)), ArgumentError);
  EXPECT_THROW(constraint_jac_adjoint_apply(st, Vector::Zero(8), Vector::Zero(3)), ArgumentError);
  EXPECT_THROW(operator_apply(st, Vector::Zero(9)), ArgumentError);
  EXPECT_THROW(operator_diff(st, Vector::Zero(8), Vector::Zero(3)), ArgumentError);
}

TEST(Construction, InvalidSpecsRejected) {
  EXPECT_THROW(ManifoldSpec::stiefel(2, 3), ArgumentError);
  EXPECT_NO_THROW(ManifoldSpec::stiefel(3, 3));
  EXPECT_THROW(ManifoldSpec::sphere(1), ArgumentError);
  Matrix B = Matrix::Identity(4, 4);
  B(3, 3) = -1.0;
  EXPECT_THROW(ManifoldSpec::generalized_stiefel(B, 2), ArgumentError);
  EXPECT_THROW(ManifoldSpec::hyperbolic(Matrix(Matrix::Identity(4, 4)), 2), ArgumentError);
  Matrix asym = Matrix::Identity(4, 4);
  asym(0, 1) = 0.5;
  EXPECT_THROW(ManifoldSpec::generalized_stiefel(asym, 2), ArgumentError);
  EXPECT_NO_THROW(ManifoldSpec::hyperbolic(B, 2));
  // One positive direction cannot host two B-orthonormal columns.
  EXPECT_THROW(ManifoldSpec::hyperbolic(Matrix(-B), 2), ArgumentError);
  EXPECT_THROW(ManifoldSpec::quadratic_lie_group(Matrix(2.0 * Matrix::Identity(3, 3)), 1),
               ArgumentError);
  EXPECT_THROW(ManifoldSpec::quadratic_lie_group(5, -1), ArgumentError);
  EXPECT_THROW(ManifoldSpec::quadratic_lie_group(4, 2), ArgumentError);
}

TEST(Operator, SphereFormula) {
  const auto sp = ManifoldSpec::sphere(2);
  EXPECT_TRUE(operator_apply(sp, vec({2, 0})).isApprox(vec({0.8, 0})));
}

TEST(Operator, StiefelScaledOrthonormal) {
  Rng rng(3);
  const auto st = ManifoldSpec::stiefel(5, 2);
  const Vector q = sample_feasible(st, rng);
  EXPECT_LE((operator_apply(st, 2.0 * q) + q).norm(), 1e-14);
}

TEST(Operator, HyperbolaLandsExactly) {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 1;
  C(1, 1) = -1;
  const auto hy = ManifoldSpec::hyperbolic(C, 1);
  EXPECT_EQ(operator_apply(hy, vec({2, 0})), vec({-1, 0}));
}

TEST(Operator, StiefelTangentDirectionPreserved) {
  Rng rng(4);
  const auto st = ManifoldSpec::stiefel(6, 3);
  const Vector x = sample_feasible(st, rng);
  const Matrix U = tangent_basis(st, x);
  const Vector d = U * gaussian(U.cols(), rng);
  EXPECT_LE((operator_diff(st, x, d) - d).norm(), 1e-12 * d.norm());
}

TEST(Operator, SphereSecondDerivativeOnAxis) {
  // Along the first axis the sphere operator reduces to t -> 2t / (1 + t^2).
  const auto sp = ManifoldSpec::sphere(2);
  const Vector e1 = vec({1, 0});
  for (double t : {-2.5, -0.7, 0.3, 1.0, 1.9}) {
    const double expected = (4 * t * t * t - 12 * t) / std::pow(1 + t * t, 3);
    const Vector got = operator_adjoint_diff_apply(sp, t * e1, e1, e1);
    EXPECT_NEAR(got(0), expected, 1e-8) << "t = " << t;
    EXPECT_NEAR(got(1), 0.0, 1e-15);
  }
}

TEST(TangentBasis, SphereAtE1) {
  const auto sp = ManifoldSpec::sphere(3);
  const Matrix U = tangent_basis(sp, vec({1, 0, 0}));
  ASSERT_EQ(U.cols(), 2);
  EXPECT_LE(U.row(0).norm(), 1e-15);
  EXPECT_LE((U.transpose() * U - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(TangentBasis, ObliqueDimension) {
  const auto ob = ManifoldSpec::oblique(2, 2);
  EXPECT_EQ(tangent_basis(ob, flatten(Matrix::Identity(2, 2))).cols(), 2);
}

TEST(TangentBasis, RejectsInfeasiblePoint) {
  const auto sp = ManifoldSpec::sphere(3);
  EXPECT_THROW(tangent_basis(sp, vec({2, 0, 0})), ArgumentError);
}

TEST(TangentBasis, LicqFailureCarriesSigma) {
  GenericConstraint c;
  c.dim = 1;
  // c(x) = (|x|^2 - 1)^2 has a vanishing gradient on its zero set.
  c.value = [](const Vector& x) { return Vector::Constant(1, std::pow(x.squaredNorm() - 1, 2)); };
  c.jac_apply = [](const Vector& x, const Vector& v) -> Vector {
    return 4.0 * (x.squaredNorm() - 1) * v(0) * x;
  };
  c.jac_adjoint_apply = [](const Vector& x, const Vector& d) {
    return Vector::Constant(1, 4.0 * (x.squaredNorm() - 1) * x.dot(d));
  };
  const auto spec = ManifoldSpec::generic(3, 1, c);
  try {
    tangent_basis(spec, vec({1, 0, 0}));
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.sigma_min(), 0.0);
  }
}

TEST(Sampler, DeterministicPerSeed) {
  for (const Case& c : all_cases()) {
    Rng a(11), b(11);
    EXPECT_EQ(sample_feasible(c.spec, a), sample_feasible(c.spec, b)) << c.label;
  }
}

TEST(Sampler, GenericWithoutSamplerIsCapabilityError) {
  GenericConstraint c;
  c.dim = 1;
  c.value = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() - 1); };
  c.jac_apply = [](const Vector& x, const Vector& v) -> Vector { return 2.0 * v(0) * x; };
  c.jac_adjoint_apply = [](const Vector& x, const Vector& d) {
    return Vector::Constant(1, 2.0 * x.dot(d));
  };
  const auto spec = ManifoldSpec::generic(4, 1, c);
  EXPECT_FALSE(has_sampler(spec));
  Rng rng(0);
  EXPECT_THROW(sample_feasible(spec, rng), CapabilityError);
}

TEST_P(EveryKind, SamplesAreFeasibleFixedPoints) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(21);
  for (int k = 0; k < 5; ++k) {
    const Vector x = sample_feasible(spec, rng);
    EXPECT_TRUE(is_feasible(spec, x));
    EXPECT_EQ(constraint_eval(spec, x).size(), spec.constraint_dim());
    EXPECT_LE((operator_apply(spec, x) - x).norm(), 1e-12 * (1.0 + x.norm()));
  }
}

TEST_P(EveryKind, ZeroInputsGiveZero) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(22);
  const Vector x = near_point(spec, rng);
  const Vector zn = Vector::Zero(spec.dim());
  const Vector zp = Vector::Zero(spec.constraint_dim());
  EXPECT_EQ(constraint_jac_apply(spec, x, zp).norm(), 0.0);
  EXPECT_EQ(operator_diff(spec, x, zn).norm(), 0.0);
  EXPECT_EQ(operator_adjoint_diff_apply(spec, x, unit(spec.dim(), rng), zn).norm(), 0.0);
  if (spec.kind() != ManifoldKind::Generic)
    EXPECT_EQ(constraint_jac_diff_apply(spec, x, unit(spec.dim(), rng), zp).norm(), 0.0);
}

TEST_P(EveryKind, ConstraintAdjointPairing) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(23);
  for (int k = 0; k < 5; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector v = gaussian(spec.constraint_dim(), rng);
    const Vector d = gaussian(spec.dim(), rng);
    const Vector Jv = constraint_jac_apply(spec, x, v);
    const Vector Jtd = constraint_jac_adjoint_apply(spec, x, d);
    const double scale = Jv.norm() * d.norm() + v.norm() * Jtd.norm();
    EXPECT_LE(std::abs(Jv.dot(d) - v.dot(Jtd)), 1e-12 * scale);
  }
}

TEST_P(EveryKind, OperatorAdjointPairing) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(24);
  for (int k = 0; k < 5; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector v = gaussian(spec.dim(), rng);
    const Vector d = gaussian(spec.dim(), rng);
    const Vector Dd = operator_diff(spec, x, d);
    const Vector Jv = operator_adjoint_apply(spec, x, v);
    const double scale = Dd.norm() * v.norm() + d.norm() * Jv.norm();
    EXPECT_LE(std::abs(Dd.dot(v) - d.dot(Jv)), 1e-12 * scale);
  }
}

TEST_P(EveryKind, ConstraintJacobianMatchesFiniteDifference) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(25);
  for (int k = 0; k < 3; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector d = unit(spec.dim(), rng);
    const Vector fd = central_diff([&](const Vector& y) { return constraint_eval(spec, y); }, x, d,
                                   fd_step(x));
    EXPECT_LE(rel_err(constraint_jac_adjoint_apply(spec, x, d), fd), 1e-6);
  }
}

TEST_P(EveryKind, JacobianDerivativeMatchesFiniteDifference) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(26);
  for (int k = 0; k < 3; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector d = unit(spec.dim(), rng);
    const Vector w = gaussian(spec.constraint_dim(), rng);
    const Vector fd = central_diff(
        [&](const Vector& y) { return constraint_jac_apply(spec, y, w); }, x, d, fd_step(x));
    EXPECT_LE(rel_err(constraint_jac_diff_apply(spec, x, d, w), fd), 1e-5);
  }
}

TEST_P(EveryKind, OperatorDiffMatchesFiniteDifference) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(27);
  for (int k = 0; k < 3; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector d = unit(spec.dim(), rng);
    const Vector fd =
        central_diff([&](const Vector& y) { return operator_apply(spec, y); }, x, d, fd_step(x));
    EXPECT_LE(rel_err(operator_diff(spec, x, d), fd), 1e-6);
  }
}

TEST_P(EveryKind, OperatorAdjointDiffMatchesFiniteDifference) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(28);
  for (int k = 0; k < 3; ++k) {
    const Vector x = near_point(spec, rng, 0.2);
    const Vector d = unit(spec.dim(), rng);
    const Vector v = gaussian(spec.dim(), rng);
    const Vector fd = central_diff(
        [&](const Vector& y) { return operator_adjoint_apply(spec, y, v); }, x, d, fd_step(x));
    EXPECT_LE(rel_err(operator_adjoint_diff_apply(spec, x, d, v), fd), 1e-5);
  }
}

TEST_P(EveryKind, AdjointKillsNormalsAndFixesTangents) {
  const ManifoldSpec& spec = GetParam().spec;
  Rng rng(29);
  const Vector x = sample_feasible(spec, rng);
  const Vector w = gaussian(spec.constraint_dim(), rng);
  EXPECT_LE(operator_adjoint_apply(spec, x, constraint_jac_apply(spec, x, w)).norm(),
            1e-8 * w.norm());
  const Matrix U = tangent_basis(spec, x);
  EXPECT_EQ(U.cols(), spec.dim() - spec.constraint_dim());
  EXPECT_LE((U.transpose() * U - Matrix::Identity(U.cols(), U.cols())).norm(), 1e-10);
  EXPECT_LE((constraint_jacobian(spec, x).transpose() * U).norm(), 1e-10);
  // DA fixes tangents; its adjoint is a projector but not necessarily orthogonal.
  const Vector u = U * gaussian(U.cols(), rng);
  EXPECT_LE((operator_diff(spec, x, u) - u).norm(), 1e-8 * u.norm());
  const Vector v = gaussian(spec.dim(), rng);
  const Vector once = operator_adjoint_apply(spec, x, v);
  EXPECT_LE((operator_adjoint_apply(spec, x, once) - once).norm(), 1e-8 * once.norm());
}

INSTANTIATE_TEST_SUITE_P(Catalog, EveryKind, ::testing::ValuesIn(all_cases()),
                         [](const auto& info) { return info.param.label; });
