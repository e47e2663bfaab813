#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tflat/error.hpp"
#include "tflat/region.hpp"

using namespace tflat;
using V = CoverReport::Verdict;

namespace {

GeneratorMatrix G(const char* text) { return GeneratorMatrix::parse(text); }

Region unit_square() { return Region::box(RationalVector{0, 0}, RationalVector{1, 1}); }

Region shear_domain(int m, int n) { return common_fd_rational(m, n, FdVariant::upper).omega; }

std::vector<oracle::QPiece> as_oracle(const Region& r) {
  std::vector<oracle::QPiece> out;
  for (const auto& p : r.pieces()) out.push_back({*p.exact_offset(), *p.exact_matrix()});
  return out;
}

// Cover values at cell-interior rational points of the cell M[0,1)^2 (oracle sweep).
std::pair<int, int> oracle_cover_range(const Region& r, const RationalMatrix& m, int n, long radius) {
  int lo = 1 << 30, hi = -1;
  const auto pieces = as_oracle(r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // off-centre offsets avoid landing on piece boundaries
      const Rational u(2 * i + 1, 2 * n), v(3 * j + 1, 3 * n);
      const std::vector<Rational> x{m(0, 0) * u + m(0, 1) * v, m(1, 0) * u + m(1, 1) * v};
      const int c = oracle::exact_cover_at(pieces, m, x, radius);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  return {lo, hi};
}

}  // namespace

TEST(RegionConstruction, OverlappingPiecesAreRejected) {
  const Parallelepiped a(RationalVector{0, 0}, RationalMatrix::identity(2));
  const Parallelepiped b(RationalVector{Rational(1, 2), 0}, RationalMatrix::identity(2));
  EXPECT_THROW(Region(2, {a, b}), ConstructionError);
  const Parallelepiped c(RationalVector{1, 0}, RationalMatrix::identity(2));
  EXPECT_NO_THROW(Region(2, {a, c}));
  EXPECT_EQ(Region(2, {a, c}).exact_measure().value(), Rational(2));
}

TEST(RegionConstruction, HalfOpenMembership) {
  const Region r = unit_square();
  EXPECT_TRUE(r.contains(Eigen::Vector2d(0, 0)));
  EXPECT_FALSE(r.contains(Eigen::Vector2d(1, 0.5)));
  EXPECT_FALSE(r.contains(Eigen::Vector2d(0.5, 1)));
  EXPECT_TRUE(r.contains(Eigen::Vector2d(0.999, 0.999)));
}

TEST(GridIndicatorTest, RiemannMeasureTracksPieceMeasure) {
  const Region r = shear_domain(2, 3);
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const auto g = r.rasterize(h);
    // perimeter of [[1/3,2],[0,3]][0,1)^2 is 2(1/3 + sqrt(13))
    const double perimeter = 2 * (1.0 / 3 + std::sqrt(13.0));
    EXPECT_NEAR(g.measure(), 1.0, 2 * 2 * h * perimeter);
  }
}

// ---- cover_classify -------------------------------------------------------

TEST(Cover, UnitSquareTilesIntegerLattice) {
  const auto r = cover_classify(unit_square(), GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(r.verdict, V::tiling);
  EXPECT_EQ(r.mode, CoverMode::exact);
  EXPECT_EQ(r.exact_defect.value(), Rational(0));
}

TEST(Cover, ShearDomainTilesIntegerLattice) {
  const auto r = cover_classify(shear_domain(2, 3), GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(r.verdict, V::tiling);
  EXPECT_EQ(r.min_cover, 1);
  EXPECT_EQ(r.max_cover, 1);
}

TEST(Cover, DoubleSquareTilingAndFourFold) {
  const Region big = Region::box(RationalVector{0, 0}, RationalVector{2, 2});
  const auto two = cover_classify(big, G("[[2,0],[0,2]]"), 1.0 / 64, 1e-6);
  EXPECT_EQ(two.verdict, V::tiling);
  const auto one = cover_classify(big, GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(one.verdict, V::k_fold_tiling);
  EXPECT_EQ(one.k, 4);
  // oracle: exact rational cover evaluation at interior points
  const auto [lo, hi] = oracle_cover_range(big, RationalMatrix::identity(2), 7, 4);
  EXPECT_EQ(lo, 4);
  EXPECT_EQ(hi, 4);
}

TEST(Cover, PackingAndNeither) {
  const Region small = Region::box(RationalVector{0, 0}, RationalVector{Rational(1, 2), 1});
  const auto p = cover_classify(small, GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(p.verdict, V::packing);
  EXPECT_EQ(p.min_cover, 0);
  EXPECT_EQ(p.max_cover, 1);
  EXPECT_DOUBLE_EQ(p.histogram.at(0), 0.5);

  const Region wide = Region::box(RationalVector{0, 0}, RationalVector{Rational(3, 2), 1});
  const auto n = cover_classify(wide, GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(n.verdict, V::neither);
  EXPECT_DOUBLE_EQ(n.histogram.at(1), 0.5);
  EXPECT_DOUBLE_EQ(n.histogram.at(2), 0.5);
}

TEST(Cover, FloatModeAgreesWithExact) {
  for (auto [m, n] : {std::pair{1, 2}, {2, 3}, {3, 4}}) {
    const auto fd = common_fd_rational(m, n, FdVariant::upper);
    for (const auto& lat : fd.lattices) {
      const auto r = cover_classify(fd.omega, lat, default_step(lat), 1e-3, CoverMode::floating);
      EXPECT_EQ(r.verdict, V::tiling) << m << "," << n;
      EXPECT_EQ(r.mode, CoverMode::floating);
    }
  }
}

TEST(Cover, ExactRequestOnFloatInputFallsBack) {
  const Region r = Region::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const auto rep = cover_classify(r, GeneratorMatrix::identity(2), 1.0 / 64, 1e-3, CoverMode::exact);
  EXPECT_TRUE(rep.fell_back);
  EXPECT_FALSE(rep.warning.empty());
  EXPECT_EQ(rep.verdict, V::tiling);
}

TEST(Cover, OneDimensional) {
  const Region r = Region::box(RationalVector{0}, RationalVector{Rational(3, 2)});
  const auto rep = cover_classify(r, G("1/2"), 1.0 / 64, 1e-6);
  EXPECT_EQ(rep.verdict, V::k_fold_tiling);
  EXPECT_EQ(rep.k, 3);
  const auto neither = cover_classify(r, G("1"), 1.0 / 64, 1e-6);
  EXPECT_EQ(neither.verdict, V::neither);
}

TEST(Cover, LowerVariantExample) {
  const auto fd = common_fd_rational(3, 2, FdVariant::lower);
  EXPECT_EQ(*fd.lattices[1].exact(), *parse_matrix("[[2/3,0],[0,3/2]]").exact);
  EXPECT_EQ(*fd.lattices[2].exact(), *parse_matrix("[[2,0],[3,1/2]]").exact);
  for (const auto& lat : fd.lattices) {
    const auto r = cover_classify(fd.omega, lat, 1.0 / 64, 1e-6);
    EXPECT_EQ(r.verdict, V::tiling);
    const auto [lo, hi] = oracle_cover_range(fd.omega, *lat.exact(), 6, 12);
    EXPECT_EQ(lo, 1);
    EXPECT_EQ(hi, 1);
  }
}

TEST(CommonDomain, Examples) {
  const auto unit = common_fd_rational(1, 1, FdVariant::upper);
  EXPECT_EQ(*unit.omega.pieces()[0].exact_matrix(), *parse_matrix("[[1,1],[0,1]]").exact);
  const auto fd = common_fd_rational(2, 3, FdVariant::upper);
  EXPECT_EQ(*fd.lattices[1].exact(), *parse_matrix("[[2/3,0],[0,3/2]]").exact);
  EXPECT_EQ(*fd.lattices[2].exact(), *parse_matrix("[[1/3,2],[0,3]]").exact);
  for (const auto& lat : fd.lattices) EXPECT_EQ(cover_classify(fd.omega, lat, 1.0, 1e-6).verdict, V::tiling);
  EXPECT_THROW(common_fd_rational(2, 4, FdVariant::upper), PreconditionError);
  EXPECT_THROW(common_fd_rational(0, 1, FdVariant::upper), PreconditionError);
}

// ---- Fourier check --------------------------------------------------------

TEST(Fourier, UnitSquareVanishesOnDualLattice) {
  EXPECT_LE(fourier_tiling_check(unit_square(), GeneratorMatrix::identity(2), 5).max_residual, 1e-12);
}

TEST(Fourier, HalfSquareDisprovesTiling) {
  const Region half = Region::box(RationalVector{0, 0}, RationalVector{Rational(1, 2), Rational(1, 2)});
  const auto rep = fourier_tiling_check(half, GeneratorMatrix::identity(2), 5);
  // closed-form oracle at xi = (1, 0)
  const double at_10 = std::abs(oracle::interval_transform(0, 0.5, 1) * oracle::interval_transform(0, 0.5, 0));
  EXPECT_NEAR(at_10, 1.0 / (2 * std::acos(-1.0)), 1e-15);
  EXPECT_GE(rep.max_residual, at_10 - 1e-15);
  EXPECT_NEAR(rep.max_residual, 1.0 / (2 * std::acos(-1.0)), 1e-12);  // frozen
}

TEST(Fourier, ShearDomainVanishes) {
  EXPECT_LE(fourier_tiling_check(shear_domain(2, 3), GeneratorMatrix::identity(2), 8).max_residual, 1e-10);
}

TEST(Fourier, TransformMatchesIntervalProduct) {
  const Region r = Region::box(Eigen::Vector2d(0.25, -0.5), Eigen::Vector2d(1.0, 0.75));
  for (const auto& xi : {Eigen::Vector2d(0.3, -1.7), Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(-0.1, 0.45)}) {
    const auto expect = oracle::interval_transform(0.25, 1.0, xi(0)) * oracle::interval_transform(-0.5, 0.75, xi(1));
    EXPECT_LE(std::abs(indicator_transform(r, xi) - expect), 1e-13);
  }
}

// ---- thicken / star_dilate --------------------------------------------------

TEST(Thicken, MeasureBounds) {
  const double h = 1.0 / 256;
  const Region t = thicken(unit_square(), 0.1, h);
  EXPECT_GE(t.measure(), 1.0);
  EXPECT_LE(t.measure(), 1.44 + 8 * h);
  // every point of the unit square is covered
  for (double x : {0.0, 0.5, 0.999})
    for (double y : {0.0, 0.3, 0.999}) EXPECT_TRUE(t.contains(Eigen::Vector2d(x, y)));
  // and points at distance 0.09 too
  EXPECT_TRUE(t.contains(Eigen::Vector2d(-0.09, 0.5)));
  EXPECT_TRUE(t.contains(Eigen::Vector2d(1.0 + 0.06, 1.0 + 0.06)));
}

TEST(Thicken, SmallRadiusLimit) {
  const double h = 1.0 / 256;
  const Region t = thicken(unit_square(), 1e-6, h);
  EXPECT_NEAR(t.measure(), 1.0, 4 * 2 * h * 4.0);
}

TEST(Thicken, ThickenedHalfStripIsNotAPacking) {
  const Region r = Region::box(RationalVector{0, 0}, RationalVector{1, Rational(1, 2)});
  const Region t = thicken(r, 0.3, 1.0 / 128);
  const auto rep = cover_classify(t, GeneratorMatrix::identity(2), 1.0 / 128, 1e-3);
  EXPECT_TRUE(rep.fell_back);
  EXPECT_NE(rep.verdict, V::packing);
  EXPECT_GE(rep.max_cover, 2);
}

TEST(Thicken, GridOnlyDilationIsSuperset) {
  const double h = 1.0 / 128;
  const Region grid = Region::from_grid(unit_square().rasterize(h));
  const Region t = thicken(grid, 0.1, h);
  EXPECT_GE(t.measure(), 1.44 - 1e-9);
  EXPECT_LE(t.measure(), std::pow(1 + 2 * (0.1 + 2 * h * std::sqrt(2.0)), 2));
}

TEST(StarDilate, Examples) {
  const Region sq = unit_square();
  const Region same = star_dilate(sq, RationalVector{Rational(1, 2), Rational(1, 2)}, Rational(1));
  EXPECT_EQ(*same.pieces()[0].exact_offset(), (RationalVector{0, 0}));
  const Region quarter = star_dilate(sq, RationalVector{Rational(1, 2), Rational(1, 2)}, Rational(1, 2));
  EXPECT_EQ(*quarter.pieces()[0].exact_offset(), (RationalVector{Rational(1, 4), Rational(1, 4)}));
  EXPECT_EQ(quarter.exact_measure().value(), Rational(1, 4));
  EXPECT_THROW(star_dilate(sq, RationalVector{2, 2}, Rational(1, 2)), PreconditionError);

  const Region shear = shear_domain(2, 3);
  const auto packed = star_dilate(shear, *shear.exact_centroid(), Rational(9, 10));
  const auto rep = cover_classify(packed, GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
  EXPECT_EQ(rep.verdict, V::packing);
  EXPECT_EQ(rep.max_cover, 1);
}

// ---- scaled_common_domain -------------------------------------------------

TEST(ScaledDomain, ShrunkUnitSquare) {
  const double h = 1.0 / 512;
  const auto r = scaled_common_domain(G("[[9/10,0],[0,9/10]]"), GeneratorMatrix::identity(2), unit_square(),
                                      Eigen::Vector2d(0.5, 0.5), h);
  EXPECT_NEAR(r.gamma, 0.9, 1e-15);
  const auto& p = r.omega.pieces()[0];
  EXPECT_EQ(*p.exact_offset(), (RationalVector{Rational(1, 20), Rational(1, 20)}));
  EXPECT_EQ(r.omega.exact_measure().value(), Rational(81, 100));
  EXPECT_LE(r.eps, 0.05);
  EXPECT_GE(r.eps, 0.05 - 3 * h);
  // Omega is a fundamental domain of A
  EXPECT_EQ(cover_classify(r.omega, G("[[9/10,0],[0,9/10]]"), h, 1e-6).verdict, V::tiling);
}

TEST(ScaledDomain, EqualVolumesAreDegenerate) {
  EXPECT_THROW(scaled_common_domain(GeneratorMatrix::identity(2), GeneratorMatrix::identity(2), unit_square(),
                                    Eigen::Vector2d(0.5, 0.5), 1.0 / 256),
               DegenerateMargin);
}

TEST(ScaledDomain, RejectsNonCommonDomain) {
  EXPECT_THROW(scaled_common_domain(G("[[1/2,0],[0,1]]"), GeneratorMatrix::identity(2), unit_square(),
                                    Eigen::Vector2d(0.5, 0.5), 1.0 / 256),
               PreconditionError);
}

TEST(ScaledDomain, DiagonalCaseTwoMargin) {
  // Omega' = [[2,0],[1,1/2]][0,1)^2 tiles diag(2,1/2) Z^2 = s*A and Z^2; gamma = 3/5
  const Region omega_prime = Region::single(Parallelepiped(RationalVector{0, 0}, *parse_matrix("[[2,0],[1,1/2]]").exact));
  const double h = 1.0 / 256;
  const auto r = scaled_common_domain(G("[[6/5,0],[0,3/10]]"), GeneratorMatrix::identity(2), omega_prime,
                                      omega_prime.centroid(), h);
  EXPECT_NEAR(r.gamma, 0.6, 1e-15);
  EXPECT_GE(r.eps, 7.0 / 120 - 2 * h);
}

// ---- properties -------------------------------------------------------------

TEST(RegionProperty, CoverVerdictIsTranslationInvariant) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> num(-40, 40);
  const Region shapes[] = {shear_domain(2, 3), unit_square(),
                           Region::box(RationalVector{0, 0}, RationalVector{Rational(1, 2), 1})};
  for (const auto& shape : shapes)
    for (int trial = 0; trial < 10; ++trial) {
      RationalVector v{Rational(num(rng), 7), Rational(num(rng), 11)};
      for (auto& c : v) c.canonicalize();
      const auto base = cover_classify(shape, GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
      const auto moved = cover_classify(shape.translated(v), GeneratorMatrix::identity(2), 1.0 / 64, 1e-6);
      EXPECT_EQ(base.verdict, moved.verdict);
      EXPECT_EQ(base.histogram, moved.histogram);
    }
}

TEST(RegionProperty, TilingImpliesMeasureEqualsCellVolume) {
  for (int m = 1; m <= 4; ++m)
    for (int n = 1; n <= 4; ++n) {
      if (std::gcd(m, n) != 1) continue;
      for (auto variant : {FdVariant::upper, FdVariant::lower}) {
        const auto fd = common_fd_rational(m, n, variant);
        for (const auto& lat : fd.lattices) {
          const auto r = cover_classify(fd.omega, lat, 1.0, 1e-6);
          ASSERT_EQ(r.verdict, V::tiling);
          EXPECT_EQ(fd.omega.exact_measure().value(), Rational(abs(lat.exact_det().value())));
        }
      }
    }
}

TEST(RegionProperty, PackingWithFullMeasureIsTiling) {
  // two half-squares stacked: packing check plus measure 1 must give tiling
  const Parallelepiped a(RationalVector{0, 0}, *parse_matrix("[[1,0],[0,1/2]]").exact);
  const Parallelepiped b(RationalVector{3, Rational(1, 2)}, *parse_matrix("[[1,0],[0,1/2]]").exact);
  const Region r(2, {a, b});
  const auto rep = cover_classify(r, GeneratorMatrix::identity(2), 1.0, 1e-6);
  EXPECT_LE(rep.max_cover, 1);
  EXPECT_EQ(r.exact_measure().value(), Rational(1));
  EXPECT_EQ(rep.verdict, V::tiling);
}

TEST(RegionProperty, FourierResidualVanishesForCertifiedDomains) {
  for (int m = 1; m <= 5; ++m)
    for (int n = 1; n <= 5; ++n) {
      if (std::gcd(m, n) != 1) continue;
      for (auto variant : {FdVariant::upper, FdVariant::lower}) {
        const auto fd = common_fd_rational(m, n, variant);
        for (const auto& lat : fd.lattices) {
          ASSERT_EQ(cover_classify(fd.omega, lat, 1.0, 1e-6).verdict, V::tiling);
          EXPECT_LE(fourier_tiling_check(fd.omega, lat, 6).max_residual, 1e-10) << m << "," << n;
        }
      }
    }
}

TEST(RegionProperty, StarDilationOfTilingIsPacking) {
  for (auto [m, n] : {std::pair{1, 1}, {2, 3}, {3, 5}}) {
    const auto fd = common_fd_rational(m, n, FdVariant::upper);
    const auto center = *fd.omega.exact_centroid();
    for (const Rational& gamma : {Rational(1, 2), Rational(9, 10), Rational(99, 100)})
      for (const auto& lat : fd.lattices) {
        const auto r = cover_classify(star_dilate(fd.omega, center, gamma), lat, 1.0, 1e-6);
        EXPECT_EQ(r.verdict, V::packing);
      }
  }
}
