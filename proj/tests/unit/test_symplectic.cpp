#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "tflat/error.hpp"
#include "tflat/symplectic.hpp"

using namespace tflat;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd c(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) c(i, j) = c(j, i) = u(rng);
  return c;
}

// rotation * upper shear with singular values kept in [0.5, 2]
Eigen::MatrixXd random_dilation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const double th = kPi * u(rng);
  return mat2(std::cos(th), -std::sin(th), std::sin(th), std::cos(th)) *
         mat2(std::exp(0.35 * u(rng)), 0.5 * u(rng), 0, std::exp(0.35 * u(rng)));
}

double bump_norm2_2d(double radius) {
  // int |phi(|t| / r)|^2 dt over the plane, radial quadrature
  const double radial = oracle::integrate([](double s) { return std::pow(oracle::bump_profile(s), 2) * s; }, 0, 1);
  return 2 * kPi * radius * radius * radial;
}

SampledWindow smooth_case_two(double h) {
  const Region omega = Region::single(Parallelepiped(Eigen::Vector2d::Zero(), mat2(1.2, 0, 0.5, 0.3)));
  return smooth_window(omega, 7.0 / 120, h);
}

TFLattice case_two_lattice() {
  return TFLattice(GeneratorMatrix(mat2(1.2, 0, 0, 0.3)), GeneratorMatrix::identity(2));
}

}  // namespace

TEST(MetaplecticOp, GeneratorsAreSymplectic) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    EXPECT_TRUE(is_symplectic(MetaplecticOp::dilation(GeneratorMatrix(random_dilation(rng))).symplectic_matrix()));
    EXPECT_TRUE(is_symplectic(MetaplecticOp::chirp(random_symmetric(rng, 2)).symplectic_matrix()));
  }
  for (int d = 1; d <= 3; ++d) {
    EXPECT_TRUE(is_symplectic(MetaplecticOp::fourier(d).symplectic_matrix()));
    EXPECT_TRUE(is_symplectic(MetaplecticOp::fourier(d, -1).symplectic_matrix()));
  }
}

TEST(MetaplecticOp, InverseComposesToIdentity) {
  std::mt19937_64 rng(12);
  const std::vector<MetaplecticOp> ops{MetaplecticOp::dilation(GeneratorMatrix(random_dilation(rng))),
                                       MetaplecticOp::chirp(random_symmetric(rng, 2)), MetaplecticOp::fourier(2)};
  for (const auto& op : ops) {
    const Eigen::MatrixXd m = op.symplectic_matrix() * op.inverse().symplectic_matrix();
    EXPECT_LT((m - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12) << op.name();
  }
}

TEST(MetaplecticOp, ChirpRejectsAsymmetricMatrix) {
  EXPECT_THROW(MetaplecticOp::chirp(mat2(0, 1, 2, 0)), PreconditionError);
  EXPECT_THROW(apply_chirp(indicator_window(Region::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), 0.25),
                           mat2(0, 1, 0, 0)),
               PreconditionError);
}

TEST(MetaplecticOp, LatticeImageMatchesSymplecticMatrix) {
  // columns of the block generator (A 0; D B) map to M (A 0; D B)
  std::mt19937_64 rng(13);
  const TFLattice l(GeneratorMatrix(mat2(1.2, 0.1, 0, 0.3)), GeneratorMatrix(mat2(1, 0, 0.2, 0.9)),
                    mat2(0.1, 0.3, -0.2, 0.05));
  const std::vector<MetaplecticOp> ops{MetaplecticOp::dilation(GeneratorMatrix(random_dilation(rng))),
                                       MetaplecticOp::chirp(random_symmetric(rng, 2))};
  for (const auto& op : ops) {
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(4, 4);
    gen.topLeftCorner(2, 2) = l.A.real();
    gen.bottomLeftCorner(2, 2) = *l.D;
    gen.bottomRightCorner(2, 2) = l.B.real();
    const Eigen::MatrixXd want = op.symplectic_matrix() * gen;
    const TFLattice m = op.apply(l);
    ASSERT_TRUE(m.D.has_value());
    EXPECT_LT((m.A.real() - want.topLeftCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-12) << op.name();
    EXPECT_LT((want.topRightCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-12) << op.name();
    EXPECT_LT((*m.D - want.bottomLeftCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-12) << op.name();
    EXPECT_LT((m.B.real() - want.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-12) << op.name();
  }
}

TEST(ApplyDilation, IdentityKeepsSamples) {
  const SampledWindow g = bump_window(Eigen::Vector2d(0.3, -0.2), 0.5, 1.0 / 64);
  const SampledWindow out = apply_dilation(g, GeneratorMatrix::identity(2));
  EXPECT_DOUBLE_EQ(out.h(), g.h());
  double worst = 0;
  for (std::size_t f = 0; f < out.size(); ++f) worst = std::max(worst, std::abs(out[f] - g(out.node(f))));
  EXPECT_LT(worst, 1e-15);
  EXPECT_NEAR(out.norm2(), g.norm2(), 1e-14);
}

TEST(ApplyDilation, DoublingSpreadsTheIndicator) {
  const SampledWindow g = indicator_window(Region::box(RationalVector{0, 0}, RationalVector{1, 1}), 1.0 / 32);
  const SampledWindow out = apply_dilation(g, GeneratorMatrix(mat2(2, 0, 0, 2)));
  for (std::size_t f = 0; f < out.size(); ++f) {
    const Eigen::VectorXd p = out.node(f);
    const bool inside = p(0) > 0 && p(0) < 2 && p(1) > 0 && p(1) < 2;
    ASSERT_EQ(out[f], Complex(inside ? 0.5 : 0.0, 0)) << p.transpose();
  }
  EXPECT_NEAR(out.norm2(), 1.0, 1e-14);
}

TEST(ApplyDilation, ShearPreservesTheNormOfASmoothWindow) {
  const double want = bump_norm2_2d(0.5);
  const SampledWindow g = bump_window(Eigen::Vector2d(0.1, 0.2), 0.5, 1.0 / 128);
  EXPECT_NEAR(g.norm2(), want, 1e-9);
  const SampledWindow out = apply_dilation(g, GeneratorMatrix(mat2(2, 1, 0, 1)));
  EXPECT_NEAR(std::sqrt(out.norm2()), std::sqrt(want), 1e-6);
  EXPECT_TRUE(out.support_certified());
}

TEST(ApplyDilation, PointwiseTransportProperty) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const SampledWindow g = bump_window(Eigen::Vector2d(0, 0), 0.6, 1.0 / 64);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd p = random_dilation(rng);
    const SampledWindow out = apply_dilation(g, GeneratorMatrix(p));
    const double s = 1 / std::sqrt(std::fabs(p.determinant()));
    for (int k = 0; k < 50; ++k) {
      const Eigen::Vector2d x(u(rng), u(rng));
      // both sides interpolate, so agreement is at interpolation accuracy
      EXPECT_NEAR(std::abs(out(p * x) - s * g(x)), 0.0, 2e-3) << "trial " << t;
    }
  }
}

TEST(ApplyChirp, ZeroMatrixIsIdentity) {
  const SampledWindow g = bump_window(Eigen::Vector2d(0, 0), 0.5, 1.0 / 32);
  const SampledWindow out = apply_chirp(g, Eigen::MatrixXd::Zero(2, 2));
  EXPECT_EQ(out.values(), g.values());
}

TEST(ApplyChirp, ModulusAndSupportUnchanged) {
  std::mt19937_64 rng(22);
  const SampledWindow g = smooth_case_two(1.0 / 64);
  for (int t = 0; t < 5; ++t) {
    const SampledWindow out = apply_chirp(g, 3 * random_symmetric(rng, 2));
    ASSERT_EQ(out.size(), g.size());
    for (std::size_t f = 0; f < g.size(); ++f) ASSERT_NEAR(std::abs(out[f]), std::abs(g[f]), 1e-15);
    EXPECT_EQ(out.support_box().lo, g.support_box().lo);
    EXPECT_EQ(out.support_box().hi, g.support_box().hi);
  }
}

TEST(ApplyChirp, HalfPointPhaseOfTheUnitInterval) {
  // h = 1/255 puts a cell centre exactly on 1/2
  const double h = 1.0 / 255;
  const SampledWindow g = indicator_window(Region::box(RationalVector{0}, RationalVector{1}), h);
  const SampledWindow out = apply_chirp(g, Eigen::MatrixXd::Constant(1, 1, 1.0));
  const Complex v = out(Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_NEAR(std::abs(v - std::polar(1.0, kPi / 4)), 0.0, 1e-12);
}

TEST(ApplyFourier, IntervalMatchesClosedForm) {
  const double h = 1.0 / 256;
  const SampledWindow g = indicator_window(Region::box(RationalVector{0}, RationalVector{1}), h);
  const SampledWindow gh = apply_fourier(g);
  EXPECT_NEAR(gh.norm2(), g.norm2(), 1e-12);
  int checked = 0;
  for (std::size_t k = 0; k < gh.size(); ++k) {
    const double xi = gh.node(k)(0);
    if (std::fabs(xi) > 10) continue;
    // the cell-centred Riemann sum carries the factor (pi xi h) / sin(pi xi h) = 1 + (pi xi h)^2 / 6 + ...
    const Complex want = oracle::interval_transform(0, 1, xi);
    EXPECT_NEAR(std::abs(gh[k] - want), 0.0, 3e-3 * std::abs(want) + 1e-12) << xi;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(ApplyFourier, InverseRecoversSmoothWindow) {
  const SampledWindow g = bump_window(Eigen::Vector2d(0.2, -0.1), 0.5, 1.0 / 32);
  const SampledWindow back = apply_fourier(apply_fourier(g), -1);
  EXPECT_NEAR(back.norm2(), g.norm2(), 1e-10);
  double worst = 0;
  for (std::size_t f = 0; f < g.size(); ++f) worst = std::max(worst, std::abs(back(g.node(f)) - g[f]));
  EXPECT_LT(worst, 1e-3);
}

TEST(ApplyFourier, LatticeSwapsTimeAndFrequency) {
  const TFLattice l(GeneratorMatrix(mat2(1.2, 0, 0, 0.3)), GeneratorMatrix(mat2(1, 0.5, 0, 2)));
  const TFLattice m = MetaplecticOp::fourier(2).apply(l);
  EXPECT_EQ(m.A.real(), l.B.real());
  EXPECT_EQ(m.B.real(), l.A.real());
  EXPECT_THROW(MetaplecticOp::fourier(2).apply(TFLattice(l.A, l.B, mat2(1, 0, 0, 1))), UnsupportedError);
}

TEST(BlockTriangular, ZeroShearGivesZeroChirp) {
  const auto r = block_triangular_reduce(GeneratorMatrix::identity(2), Eigen::MatrixXd::Zero(2, 2),
                                         GeneratorMatrix::identity(2));
  EXPECT_TRUE(r.op.matrix().isZero(0.0));
  EXPECT_EQ(r.separable.A().real(), Eigen::MatrixXd::Identity(2, 2));
}

TEST(BlockTriangular, SymmetricShearIsReducible) {
  const Eigen::MatrixXd d = mat2(1, 2, 2, 0);
  const auto r = block_triangular_reduce(GeneratorMatrix::identity(2), d, GeneratorMatrix::identity(2));
  EXPECT_EQ(r.op.kind(), MetaplecticKind::chirp);
  EXPECT_LT((r.op.matrix() + d).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BlockTriangular, AsymmetricShearIsNotReducible) {
  EXPECT_THROW(block_triangular_reduce(GeneratorMatrix::identity(2), mat2(0, 1, 2, 0), GeneratorMatrix::identity(2)),
               NotReducible);
}

TEST(BlockTriangular, ChirpMapsTheBlockLatticeOntoTheSeparableOne) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd a = random_dilation(rng);
    const Eigen::MatrixXd d = random_symmetric(rng, 2) * a;  // D A^{-1} symmetric by construction
    const GeneratorMatrix ga(a), gb(random_dilation(rng));
    const auto r = block_triangular_reduce(ga, d, gb);
    const TFLattice image = r.op.apply(TFLattice(ga, gb, d));
    EXPECT_TRUE(image.separable()) << "trial " << t;
    const TFLattice back = r.op.inverse().apply(TFLattice(r.separable));
    ASSERT_TRUE(back.D.has_value());
    EXPECT_LT((*back.D - d).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MetaplecticInvariance, FrameBoundsSurviveChirpsAndDilations) {
  std::mt19937_64 rng(41);
  const SampledWindow g = smooth_case_two(1.0 / 128);
  const TFLattice l = case_two_lattice();
  const GramianReport base = frame_bounds(g, l, 16);
  for (int t = 0; t < 6; ++t) {
    const MetaplecticOp op = t % 2 ? MetaplecticOp::chirp(random_symmetric(rng, 2))
                                   : MetaplecticOp::dilation(GeneratorMatrix(random_dilation(rng)));
    const GramianReport r = frame_bounds(op.apply(g), op.apply(l), 16);
    EXPECT_NEAR(r.a_est, base.a_est, 1e-2) << op.name();
    EXPECT_NEAR(r.b_est, base.b_est, 1e-2) << op.name();
  }
}

TEST(MetaplecticInvariance, ChirpKeepsTheTightResidual) {
  std::mt19937_64 rng(42);
  const SampledWindow g = smooth_case_two(1.0 / 128);
  const TFLattice l = case_two_lattice();
  const double base = tight_residual(g, l, 16);
  for (int t = 0; t < 3; ++t) {
    const MetaplecticOp op = MetaplecticOp::chirp(2 * random_symmetric(rng, 2));
    // modulus is kept exactly; interpolating the chirped samples moves the residual at quadrature level
    EXPECT_NEAR(tight_residual(op.apply(g), op.apply(l), 16), base, 1e-4);
  }
}
