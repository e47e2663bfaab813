#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tflat/error.hpp"
#include "tflat/frame.hpp"

using namespace tflat;

namespace {

GeneratorMatrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return GeneratorMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

SampledWindow box_indicator(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double h) {
  return indicator_window(Region::box(lo, hi), h);
}

SampledWindow interval_indicator(double a, double b, double h) {
  return box_indicator(Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b), h);
}

// continuous pyramid on [0,1)^2 vanishing on the boundary
SampledWindow cone(double h) {
  SampledWindow g = window_grid(Box::cube(2, 0, 1), h, 2, Interpolation::cubic);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Eigen::VectorXd p = g.node(f);
    const double r = std::max(std::fabs(p(0) - 0.5), std::fabs(p(1) - 0.5));
    g[f] = std::max(0.0, 1.0 - 2.0 * r);
  }
  return g;
}

// the smooth tight window on diag(1.2, 0.3) x I
struct CaseTwo {
  SampledWindow g;
  SeparableTFLattice lattice;
};

CaseTwo case_two(double h) {
  Eigen::Matrix2d m;
  m << 1.2, 0, 0.5, 0.3;
  const Region omega = Region::single(Parallelepiped(Eigen::Vector2d::Zero(), Eigen::MatrixXd(m)));
  return {smooth_window(omega, 7.0 / 120, h), SeparableTFLattice(diag({1.2, 0.3}), GeneratorMatrix::identity(2))};
}

Region union_of_w(double x, double y) {
  const Parallelepiped w(Eigen::Vector2d(0, 0), Eigen::MatrixXd(Eigen::Vector2d(0.5, 1).asDiagonal()));
  const Parallelepiped v(Eigen::Vector2d(x, y), Eigen::MatrixXd(Eigen::Vector2d(0.5, 1).asDiagonal()));
  return Region(2, {w, v});
}

}  // namespace

// ---- coefficients -------------------------------------------------------------------

TEST(GaborCoeff, IndicatorExamples) {
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 64);
  const auto c = [&](double x, double w) { return gabor_coeff(g, g, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, w)); };
  EXPECT_NEAR(std::abs(c(0, 0) - Complex(1, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c(0, 1)), 0.0, 1e-12);
  // overlap of [0,1) and [1/2, 3/2) has length 1/2
  EXPECT_NEAR(std::abs(c(0.5, 0) - Complex(0.5, 0)), 0.0, 1e-12);
}

TEST(GaborCoeff, MatchesClosedFormTransform) {
  // <chi_[0,1), M_w T_x chi_[0,1)> = Fourier transform of chi over the overlap [x, 1)
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 512);
  for (double x : {0.0, 0.25, 0.5}) {
    for (double w : {0.3, 1.7, -2.25}) {
      const Complex got = gabor_coeff(g, g, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, w));
      const Complex want = oracle::interval_transform(x, 1.0, w);
      // midpoint rule on the cells: O(h^2 w^2)
      EXPECT_NEAR(std::abs(got - want), 0.0, 1e-4) << x << " " << w;
    }
  }
}

TEST(GaborCoeff, DisjointSupportsGiveExactZero) {
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 64);
  EXPECT_EQ(gabor_coeff(g, g, Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 0.2)), Complex(0, 0));
}

TEST(GaborCoeff, BatchAgreesWithSingleCalls) {
  const CaseTwo s = case_two(1.0 / 64);
  const Eigen::Vector2d x(0.4, -0.1);
  const std::vector<Eigen::VectorXd> ws{Eigen::Vector2d(0, 0), Eigen::Vector2d(1.5, -0.5), Eigen::Vector2d(-3, 2)};
  const auto batch = gabor_coeffs(s.g, s.g, x, ws);
  for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_EQ(batch[i], gabor_coeff(s.g, s.g, x, ws[i]));
}

// ---- Gramian ------------------------------------------------------------------------

TEST(Gramian, SingleOverlapIsOneByOne) {
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 64);
  const SeparableTFLattice l(GeneratorMatrix::identity(1), GeneratorMatrix::identity(1));
  for (double x : {0.1, 0.5, 0.9}) {
    const GramianSection s = gramian(g, l, Eigen::VectorXd::Constant(1, x), GramianOptions{0});
    ASSERT_EQ(s.matrix.rows(), 1);
    EXPECT_NEAR(std::abs(s.matrix(0, 0) - Complex(1, 0)), 0.0, 1e-14);
  }
}

TEST(Gramian, DefaultSectionOfOrthonormalBasisIsIdentity) {
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 64);
  const SeparableTFLattice l(GeneratorMatrix::identity(1), GeneratorMatrix::identity(1));
  const GramianSection s = gramian(g, l, Eigen::VectorXd::Constant(1, 0.3));
  EXPECT_EQ(s.matrix.rows(), 33);
  EXPECT_NEAR((s.matrix - Eigen::MatrixXcd::Identity(33, 33)).norm(), 0.0, 1e-14);
}

TEST(Gramian, FundamentalDomainWithPackingIsDiagonal) {
  // supp g = [0,1]^2 tiles under Z^2 and packs under Z^2: G(x) = diag(|g(x - j)|^2)
  const SampledWindow g = cone(1.0 / 64);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Vector2d x(u(rng), u(rng));
    const GramianSection s = gramian(g, l, x, GramianOptions{1});
    Eigen::MatrixXcd off = s.matrix;
    off.diagonal().setZero();
    EXPECT_EQ(off.norm(), 0.0);
    // row of j = 0 sits in the middle of the 3 x 3 section
    EXPECT_NEAR(s.matrix(4, 4).real(), std::norm(g(x)), 1e-14);
  }
}

TEST(Gramian, ZeroWindowGivesZeroMatrix) {
  SampledWindow g = interval_indicator(0, 1, 1.0 / 32);
  for (auto& v : g.values()) v = 0;
  const SeparableTFLattice l(GeneratorMatrix::identity(1), GeneratorMatrix::identity(1));
  const GramianSection s = gramian(g, l, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_EQ(s.matrix.norm(), 0.0);
}

TEST(Gramian, IntervalMatchesCountingOracle) {
  // chi_[0,3/2) on 1/2 Z x Z, entries are overlap counts
  const SampledWindow g = interval_indicator(0, 1.5, 1.0 / 64);
  const SeparableTFLattice l(diag({0.5}), GeneratorMatrix::identity(1));
  for (double x : {0.03, 0.21, 0.48, 0.77}) {
    const GramianSection s = gramian(g, l, Eigen::VectorXd::Constant(1, x), GramianOptions{4});
    const Eigen::MatrixXd want = oracle::interval_gramian(1.5, 0.5, 1.0, x, 4);
    EXPECT_NEAR((s.matrix.real() - want).norm(), 0.0, 1e-12) << x;
    EXPECT_EQ(s.matrix.imag().norm(), 0.0);
  }
}

TEST(Gramian, ShiftByDualLatticeShiftsIndices) {
  const CaseTwo s = case_two(1.0 / 64);
  const Eigen::Vector2d x(0.37, 0.61);
  const Eigen::Vector2d k(1, 0);  // B^{-T} = I
  const GramianSection g0 = gramian(s.g, s.lattice, x);
  const GramianSection g1 = gramian(s.g, s.lattice, x + k);
  const long J = 3, side = 2 * J + 1;
  // G(x + k)_{j, j'} = G(x)_{j - k, j' - k} on the overlap of the two sections
  for (long r = 0; r < side * side; ++r)
    for (long c = 0; c < side * side; ++c) {
      const long rj0 = r % side - J, rj1 = r / side - J, cj0 = c % side - J, cj1 = c / side - J;
      if (rj0 - 1 < -J || cj0 - 1 < -J) continue;
      const long r2 = (rj0 - 1 + J) + (rj1 + J) * side, c2 = (cj0 - 1 + J) + (cj1 + J) * side;
      EXPECT_NEAR(std::abs(g1.matrix(r, c) - g0.matrix(r2, c2)), 0.0, 1e-12);
    }
}

TEST(Gramian, HermitianPositiveSemidefiniteForRandomWindows) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const SeparableTFLattice l(diag({0.5, 0.75}), diag({0.8, 1.0}));
  for (int trial = 0; trial < 5; ++trial) {
    SampledWindow g = window_grid(Box::cube(2, 0, 1), 1.0 / 16, 2, Interpolation::cubic);
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto idx = g.unflatten(f);
      const bool inner = idx[0] >= 2 && idx[1] >= 2 && idx[0] < g.count()[0] - 2 && idx[1] < g.count()[1] - 2;
      g[f] = inner ? Complex(u(rng), u(rng)) : Complex(0, 0);
    }
    const Eigen::Vector2d x(u(rng), u(rng));
    const Eigen::MatrixXcd m = gramian(g, l, x, GramianOptions{2}).matrix;
    EXPECT_LT((m - m.adjoint()).norm(), 1e-10 * (1 + m.norm()));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10 * (1 + m.norm()));
    const auto [lo, hi] = hermitian_extremes(m);
    EXPECT_NEAR(lo, es.eigenvalues().minCoeff(), 1e-10);
    EXPECT_NEAR(hi, es.eigenvalues().maxCoeff(), 1e-10);
  }
}

TEST(Gramian, ShearPhasesKeepTheMatrixHermitian) {
  const CaseTwo s = case_two(1.0 / 64);
  Eigen::Matrix2d D;
  D << 0.3, 0.1, 0.1, -0.2;
  const TFLattice l(s.lattice.A(), s.lattice.B(), Eigen::MatrixXd(D));
  const Eigen::MatrixXcd m = gramian(s.g, l, Eigen::Vector2d(0.2, 0.7)).matrix;
  EXPECT_LT((m - m.adjoint()).norm(), 1e-12);
}

// ---- frame bounds -------------------------------------------------------------------

TEST(FrameBounds, OrthonormalBasis) {
  const SampledWindow g = box_indicator(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 1.0 / 64);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2));
  const GramianReport r = frame_bounds(g, l, 8);
  EXPECT_NEAR(r.a_est, 1.0, 1e-10);
  EXPECT_NEAR(r.b_est, 1.0, 1e-10);
  EXPECT_NEAR(r.tight_residual, 0.0, 1e-10);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.x_samples.size(), 64u);
}

TEST(FrameBounds, ThreeHalvesIntervalIsAFrame) {
  const SampledWindow g = interval_indicator(0, 1.5, 1.0 / 64);
  const SeparableTFLattice l(diag({0.5}), GeneratorMatrix::identity(1));
  const GramianReport r = frame_bounds(g, l, 64);
  EXPECT_GT(r.a_est, 0.05);
  EXPECT_LE(r.b_est, 5.0 + 1e-12);
  // same samples through the counting oracle
  double a = INFINITY, b = -INFINITY;
  for (int i = 0; i < 64; ++i) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::interval_gramian(1.5, 0.5, 1.0, (i + 0.5) / 64, 16));
    a = std::min(a, es.eigenvalues().minCoeff());
    b = std::max(b, es.eigenvalues().maxCoeff());
  }
  EXPECT_NEAR(r.a_est, a, 1e-10);
  EXPECT_NEAR(r.b_est, b, 1e-10);
}

TEST(FrameBounds, ContinuousFundamentalDomainWindowIsNotAFrame) {
  const SampledWindow g = cone(1.0 / 256);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2));
  double prev = INFINITY;
  for (int n : {16, 64, 256}) {
    const double a = frame_bounds(g, l, n).a_est;
    EXPECT_LT(a, prev);
    prev = a;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(FrameBounds, KFoldTilingConstant) {
  const SampledWindow g = box_indicator(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2), 1.0 / 32);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), diag({0.5, 0.5}));
  const GramianReport r = frame_bounds(g, l, 8);
  EXPECT_NEAR(r.a_est, 16.0, 1e-8);
  EXPECT_NEAR(r.b_est, 16.0, 1e-8);
  EXPECT_NEAR(r.tight_constant, 16.0, 1e-12);
}

TEST(FrameBounds, SmoothCaseTwoWindowIsTight) {
  const CaseTwo s = case_two(1.0 / 256);
  const GramianReport r = frame_bounds(s.g, s.lattice, 32);
  EXPECT_NEAR(r.tight_constant, 1.0, 1e-6);
  EXPECT_LE(r.tight_residual, 5e-3);
  EXPECT_FALSE(r.exact);
}

TEST(FrameBounds, TightnessFailsForShiftedUnion) {
  const SeparableTFLattice l(diag({0.5, 1}), GeneratorMatrix::identity(2));
  const SampledWindow g = indicator_window(union_of_w(1, 1.0 / 3), 1.0 / 48);
  EXPECT_GE(tight_residual(g, l, 12), 0.05);
}

TEST(FrameBounds, OddIntegerShiftCouplesNeighbouringRows) {
  // W and W + (1, 0) differ by an integer vector, so G(x) is tridiag(1, 2, 1) along j_1
  const SeparableTFLattice l(diag({0.5, 1}), GeneratorMatrix::identity(2));
  const SampledWindow g = indicator_window(union_of_w(1, 0), 1.0 / 32);
  const GramianSection s = gramian(g, l, Eigen::Vector2d(0.25, 0.5), GramianOptions{1});
  EXPECT_NEAR(s.matrix(4, 4).real(), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(s.matrix(4, 3)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.matrix(4, 5)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.matrix(4, 1)), 0.0, 1e-12);
}

// ---- orthonormality -----------------------------------------------------------------

TEST(Orthonormality, BasisOnTheIntegerLattice) {
  const SampledWindow g = box_indicator(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 1.0 / 32);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2));
  const OrthonormalityReport r = orthonormality(g, l, 3);
  EXPECT_LE(r.residual, 1e-8);
  EXPECT_TRUE(r.normalized);
  EXPECT_GT(r.points, 100u);
}

TEST(Orthonormality, OverlappingTranslates) {
  // <g, T_1 g> = 1/2 for g = chi_[0,2) / sqrt(2)
  const SampledWindow g = interval_indicator(0, 2, 1.0 / 32).scaled(1.0 / std::sqrt(2.0));
  const SeparableTFLattice l(GeneratorMatrix::identity(1), GeneratorMatrix::identity(1));
  const double r = orthonormality_residual(g, l, 2);
  EXPECT_GE(r, 0.5 - 1e-12);
  EXPECT_NEAR(r, 0.5, 1e-12);
}

TEST(Orthonormality, SmoothCaseTwoOnTheAdjointLattice) {
  const CaseTwo s = case_two(1.0 / 256);
  const SampledWindow g = s.g.scaled(1.0 / std::sqrt(s.g.norm2()));
  const OrthonormalityReport r = orthonormality(g, adjoint_separable(s.lattice), 3);
  EXPECT_LE(r.residual, 1e-3);
  EXPECT_TRUE(r.normalized);
  EXPECT_LE(r.tail_estimate, 1e-3);
}

TEST(Orthonormality, UnnormalizedWindowIsFlagged) {
  const SampledWindow g = interval_indicator(0, 1, 1.0 / 32).scaled(2.0);
  const SeparableTFLattice l(GeneratorMatrix::identity(1), GeneratorMatrix::identity(1));
  const OrthonormalityReport r = orthonormality(g, l, 1);
  EXPECT_FALSE(r.normalized);
  EXPECT_NEAR(r.residual, 3.0, 1e-12);
}

// ---- Parseval -----------------------------------------------------------------------

TEST(Parseval, OrthonormalBasisReproducesTheWindow) {
  const SampledWindow g = box_indicator(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 1.0 / 32);
  const SeparableTFLattice l(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2));
  // f = g lies in a single cell of the torus; 16 sqrt 2 keeps every frequency bin
  const ParsevalReport r = parseval(g, g, l, 16.0 * std::sqrt(2.0));
  EXPECT_LE(r.residual, 1e-6);
}

TEST(Parseval, MatchesDirectSummationOracle) {
  const double h = 1.0 / 128;
  const SampledWindow f = bump_window(Eigen::VectorXd::Constant(1, 0.5), 0.4, h);
  const SampledWindow g = smooth_window(Region::box(Eigen::VectorXd::Constant(1, 0), Eigen::VectorXd::Constant(1, 1)), 0.2, h);
  const SeparableTFLattice l(GeneratorMatrix::identity(1), diag({0.5}));
  for (double trunc : {4.0, 10.0}) {
    const double got = parseval(f, g, l, trunc).residual;
    const double want = oracle::parseval_direct_1d([&](double t) { return f(Eigen::VectorXd::Constant(1, t)).real(); },
                                                   [&](double t) { return g(Eigen::VectorXd::Constant(1, t)).real(); },
                                                   1.0, 0.5, trunc, -2.0, h, static_cast<long>(5.0 / h));
    EXPECT_NEAR(got, want, 1e-9) << trunc;
  }
}

TEST(Parseval, SmoothTightSystemConverges) {
  const CaseTwo s = case_two(1.0 / 256);
  const SampledWindow f = bump_window(Eigen::Vector2d(0.5, 0.5), 0.4, 1.0 / 256);
  const ParsevalReport r = parseval(f, s.g, s.lattice);
  EXPECT_LE(r.residual, 1e-2);
  EXPECT_LT(r.tail, 1e-3);
  EXPECT_LE(parseval_residual(f, s.g, s.lattice, 2 * r.truncation), 1e-3);
}

TEST(Parseval, NonTightSystemStalls) {
  // chi_[0,3/2) on 1/2 Z x Z is a frame but not tight: more frequencies do not help
  const double h = 1.0 / 64;
  const SampledWindow f = bump_window(Eigen::VectorXd::Constant(1, 0.75), 0.5, h);
  const SampledWindow g = interval_indicator(0, 1.5, h);
  const SeparableTFLattice l(diag({0.5}), GeneratorMatrix::identity(1));
  const double r1 = parseval_residual(f, g, l, 8);
  const double r2 = parseval_residual(f, g, l, 24);
  EXPECT_GT(r1, 0.05);
  EXPECT_GT(r2, 0.05);
}

// ---- properties ---------------------------------------------------------------------

TEST(FrameProperty, BoundsScaleQuadratically) {
  const CaseTwo s = case_two(1.0 / 64);
  const GramianReport r = frame_bounds(s.g, s.lattice, 6);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double k = u(rng);
    const GramianReport q = frame_bounds(s.g.scaled(k), s.lattice, 6);
    EXPECT_NEAR(q.a_est, k * k * r.a_est, 1e-12 * k * k);
    EXPECT_NEAR(q.b_est, k * k * r.b_est, 1e-12 * k * k);
  }
}

TEST(FrameProperty, EstimatesAreOrderedAndConsistent) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> len(0.3, 2.5), step(0.3, 1.2);
  for (int trial = 0; trial < 10; ++trial) {
    const SampledWindow g = interval_indicator(0, len(rng), 1.0 / 64);
    const SeparableTFLattice l(diag({step(rng)}), diag({step(rng)}));
    const GramianReport r = frame_bounds(g, l, 16);
    EXPECT_LE(0.0, r.a_est);
    EXPECT_LE(r.a_est, r.b_est);
    EXPECT_GE(r.tight_residual, r.b_est - r.tight_constant - 1e-12);
    EXPECT_GE(r.tight_residual, r.tight_constant - r.a_est - 1e-12);
  }
}

TEST(FrameProperty, ResultIsIndependentOfSampleOrder) {
  const CaseTwo s = case_two(1.0 / 64);
  const GramianReport a = frame_bounds(s.g, s.lattice, 8);
  const GramianReport b = frame_bounds(s.g, s.lattice, 8);
  EXPECT_EQ(a.a_est, b.a_est);
  EXPECT_EQ(a.b_est, b.b_est);
  EXPECT_EQ(a.lambda_min, b.lambda_min);
}
