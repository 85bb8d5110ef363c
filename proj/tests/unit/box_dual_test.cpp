#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spgm/box_dual.hpp"

namespace {

using spgm::BoxQuadDual;
using spgm::Index;
using spgm::Matrix;
using spgm::Minibatch;
using spgm::NonsmoothComponent;
using spgm::ScalarLoss;
using spgm::Vector;

Matrix gaussian(spgm::Rng& rng, Index r, Index c) {
  std::normal_distribution<double> normal;
  Matrix a(r, c);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a;
}

TEST(BoxQuadDual, QuadraticPiecesAgreeWithDenseForm) {
  spgm::Rng rng(1);
  const Matrix a = gaussian(rng, 4, 3);
  const Vector w = gaussian(rng, 4, 1);
  const Vector kink = gaussian(rng, 3, 1);
  const double mu = 0.8;
  const BoxQuadDual d(mu, 3, w, a, Vector::Zero(3), Vector::Ones(3), kink);
  const Matrix q = (mu / 3.0) * a.transpose() * a;
  EXPECT_LE((d.dense_q() - q).norm(), 1e-13);
  EXPECT_LE((d.linear() - (a.transpose() * w - kink)).norm(), 1e-13);
  const Vector v = Vector::Constant(3, 0.4);
  EXPECT_LE((d.apply_q(v) - q * v).norm(), 1e-13);
  EXPECT_LE((d.gradient(v) - (d.linear() - q * v)).norm(), 1e-13);
  EXPECT_NEAR(d.objective(v), -0.5 * v.dot(q * v) + d.linear().dot(v), 1e-13);
  EXPECT_LE((d.recover(v) - (w - (mu / 3.0) * a * v)).norm(), 1e-13);
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().maxCoeff();
  EXPECT_NEAR(d.lambda_max(), lmax, 1e-6 * lmax);
  EXPECT_GE(d.lambda_bound(), lmax * (1.0 - 1e-12));
  EXPECT_DOUBLE_EQ(d.diameter(), std::sqrt(3.0));
}

TEST(BoxQuadDual, WeakDualityAndZeroGapAtOptimum) {
  spgm::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gaussian(rng, 3, 4);
    const Vector w = gaussian(rng, 3, 1);
    const Vector lo = Vector::Constant(4, -1.0), hi = Vector::Ones(4);
    const Vector kink = 0.3 * gaussian(rng, 4, 1);
    const BoxQuadDual d(0.6, 4, w, a, lo, hi, kink);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector v(4);
    for (auto& x : v) x = unif(rng);
    EXPECT_GE(d.duality_gap(v), -1e-12);
    EXPECT_NEAR(d.duality_gap(v), d.primal_value(d.recover(v)) - d.dual_value(v), 1e-10);
    const Vector v_star = oracle::box_qp_enumerate(d.dense_q(), d.linear(), lo, hi);
    EXPECT_NEAR(d.duality_gap(v_star), 0.0, 1e-10);
  }
}

TEST(BoxQuadDual, ProjectClampsToBox) {
  const BoxQuadDual d(1.0, 2, Vector::Zero(1), Matrix(Matrix::Ones(1, 2)), Vector::Zero(2),
                      Vector::Ones(2), Vector::Zero(2));
  Vector v(2);
  v << -3.0, 0.25;
  const Vector p = d.project(v);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 0.25);
}

TEST(BoxQuadDual, RejectsBadShapes) {
  EXPECT_THROW(BoxQuadDual(0.0, 1, Vector::Zero(1), Matrix(Matrix::Ones(1, 1)), Vector::Zero(1),
                           Vector::Ones(1), Vector::Zero(1)),
               std::invalid_argument);
  EXPECT_THROW(BoxQuadDual(1.0, 1, Vector::Zero(2), Matrix(Matrix::Ones(1, 1)), Vector::Zero(1),
                           Vector::Ones(1), Vector::Zero(1)),
               std::invalid_argument);
  EXPECT_THROW(BoxQuadDual(1.0, 1, Vector::Zero(1), Matrix(Matrix::Ones(1, 1)), Vector::Ones(1),
                           Vector::Zero(1), Vector::Zero(1)),
               std::invalid_argument);
}

TEST(BuildDual, LinearCompositionUsesBatchAtoms) {
  spgm::Rng rng(3);
  const Matrix atoms = gaussian(rng, 3, 5);
  const NonsmoothComponent h(3, spgm::LinearComposition{atoms, ScalarLoss::hinge()});
  const Vector w = gaussian(rng, 3, 1);
  const BoxQuadDual d = spgm::build_dual(h, w, Minibatch{{4, 1, 4}}, 0.5);
  ASSERT_EQ(d.size(), 3);
  const auto& a = std::get<Matrix>(d.op());
  EXPECT_EQ(a.col(0), atoms.col(4));
  EXPECT_EQ(a.col(1), atoms.col(1));
  EXPECT_EQ(d.lower(), Vector::Zero(3));
  EXPECT_EQ(d.upper(), Vector::Ones(3));
  EXPECT_EQ(d.kink(), Vector::Constant(3, -1.0));
}

TEST(BuildDual, SeparableUsesBlockIdentity) {
  const Index n = 2;
  Matrix lower = Matrix::Constant(n, 3, -1.0), upper = Matrix::Ones(n, 3), kink = Matrix::Zero(n, 3);
  kink(1, 2) = 0.5;
  const NonsmoothComponent h(n, spgm::SeparableConjugate{lower, upper, kink});
  const BoxQuadDual d = spgm::build_dual(h, Vector::Ones(n), Minibatch{{0, 2}}, 1.0);
  EXPECT_EQ(d.size(), n * 2);
  EXPECT_TRUE(std::holds_alternative<BoxQuadDual::BlockIdentity>(d.op()));
  // Coordinate k of sample j lives at j * n + k.
  EXPECT_EQ(d.kink()[3], 0.5);
  Vector v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  Vector av(2);
  av << 4.0, 6.0;
  EXPECT_EQ(d.apply_operator(v), av);
}

TEST(BuildDual, StructuresWithoutDualFormThrow) {
  const NonsmoothComponent zero = NonsmoothComponent::zero(2);
  EXPECT_THROW(spgm::build_dual(zero, Vector::Zero(2), Minibatch{{0}}, 1.0), spgm::UnsupportedStructure);
  const NonsmoothComponent box(2, spgm::BoxIndicator{Matrix::Zero(2, 1), Matrix::Ones(2, 1)});
  EXPECT_THROW(spgm::build_dual(box, Vector::Zero(2), Minibatch{{0}}, 1.0), spgm::UnsupportedStructure);
  const NonsmoothComponent h(2, spgm::LinearComposition{Matrix::Ones(2, 1), ScalarLoss::hinge()});
  EXPECT_THROW(spgm::build_dual(h, Vector::Zero(2), Minibatch{{1}}, 1.0), std::invalid_argument);
  EXPECT_THROW(spgm::build_dual(h, Vector::Zero(2), Minibatch{{0}}, -1.0), std::invalid_argument);
}

}  // namespace
