#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "tflat/error.hpp"
#include "tflat/pipeline.hpp"

using namespace tflat;

namespace {

Eigen::Matrix2d m2(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return m;
}

GeneratorMatrix gen(const Eigen::Matrix2d& m) { return GeneratorMatrix(Eigen::MatrixXd(m)); }

PipelineOptions coarse() {
  PipelineOptions o;
  o.h = 1.0 / 128;
  o.samples = 16;
  return o;
}

// Does (m/n)^2 = x for some coprime m, n <= bound? Plain scan, no continued fractions.
bool square_ratio_in_scan(double x, int bound) {
  for (int n = 1; n <= bound; ++n)
    for (int m = 1; m <= bound; ++m)
      if (std::gcd(m, n) == 1 && std::fabs(static_cast<double>(m * m) / (n * n) - x) < 1e-9) return true;
  return false;
}

}  // namespace

TEST(MatchForm, ScalarHalf) {
  const auto f = match_form(m2(0.5, 0, 0, 0.5));
  ASSERT_TRUE(f);
  EXPECT_EQ(f->form, SeparableForm::scalar);
  EXPECT_DOUBLE_EQ(f->alpha, 0.5);
  EXPECT_LT((f->rescaled - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatchForm, DiagonalTwoThree) {
  const double alpha = 1.0 / 7;  // below 1/(mn) = 1/6
  const auto f = match_form(m2(4 * alpha, 0, 0, 9 * alpha));
  ASSERT_TRUE(f);
  EXPECT_EQ(f->form, SeparableForm::diagonal);
  EXPECT_EQ(f->m, 2);
  EXPECT_EQ(f->n, 3);
  EXPECT_NEAR(f->alpha, alpha, 1e-15);
  EXPECT_LT((f->rescaled - m2(2.0 / 3, 0, 0, 1.5)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MatchForm, DiagonalBoundaryDoesNotMatch) {
  const double alpha = 1.0 / 6;
  EXPECT_FALSE(match_form(m2(4 * alpha, 0, 0, 9 * alpha)));
  EXPECT_TRUE(match_form(m2(4 * alpha * 0.999, 0, 0, 9 * alpha * 0.999)));
}

TEST(MatchForm, IrrationalRatioIsUnclassified) {
  const double s = 0.3;
  const Eigen::Matrix2d p = s * m2(std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0));
  EXPECT_FALSE(match_form(p));
  EXPECT_FALSE(square_ratio_in_scan(p(0, 0) / p(1, 1), 50));
}

TEST(MatchForm, UpperAndLowerTriangular) {
  const double alpha = 0.3;  // below 1/n = 1/3
  const auto up = match_form(m2(alpha, 2 * 3 * alpha, 0, 9 * alpha));
  ASSERT_TRUE(up);
  EXPECT_EQ(up->form, SeparableForm::upper);
  EXPECT_EQ(up->m, 2);
  EXPECT_EQ(up->n, 3);
  EXPECT_LT((up->rescaled - m2(1.0 / 3, 2, 0, 3)).cwiseAbs().maxCoeff(), 1e-14);

  const auto lo = match_form(m2(9 * alpha, 0, 2 * 3 * alpha, alpha));
  ASSERT_TRUE(lo);
  EXPECT_EQ(lo->form, SeparableForm::lower);
  EXPECT_EQ(lo->m, 2);
  EXPECT_EQ(lo->n, 3);
  EXPECT_LT((lo->rescaled - m2(3, 0, 2, 1.0 / 3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MatchForm, TriangularBoundaryAndCommonFactorDoNotMatch) {
  const double edge = 1.0 / 3;
  EXPECT_FALSE(match_form(m2(edge, 2 * 3 * edge, 0, 9 * edge)));
  // m = 3, n = 3 share a factor
  EXPECT_FALSE(match_form(m2(0.1, 9 * 0.1, 0, 9 * 0.1)));
  // n^2 = 2 is not a square
  EXPECT_FALSE(match_form(m2(0.1, 0.1, 0, 0.2)));
}

TEST(MatchForm, NegativeAlpha) {
  const auto f = match_form(m2(-0.25, 0, 0, -0.25));
  ASSERT_TRUE(f);
  EXPECT_EQ(f->form, SeparableForm::scalar);
  EXPECT_DOUBLE_EQ(f->alpha, -0.25);
}

TEST(DiagPipeline, CaseOneForSmallProducts) {
  const auto p = diag_pipeline(0.9, 0.9, 0.9, 0.9);
  EXPECT_EQ(p.diag_case, 1);
  ASSERT_EQ(p.plateaus.size(), 2u);
  EXPECT_DOUBLE_EQ(p.plateaus[0].inner.second, 0.9);
  EXPECT_NEAR(p.plateaus[0].outer.first, (0.81 - 1) / 1.8, 1e-15);
  EXPECT_NEAR(p.plateaus[0].outer.second, (0.81 + 1) / 1.8, 1e-15);
  EXPECT_FALSE(p.tight_expected);
}

TEST(DiagPipeline, CaseTwoEpsilon) {
  const auto p = diag_pipeline(1.2, 0.3, 1, 1);
  EXPECT_EQ(p.diag_case, 2);
  EXPECT_NEAR(p.eps, 7.0 / 120, 1e-15);
  ASSERT_TRUE(p.omega);
  EXPECT_NEAR(p.omega->measure(), 0.36, 1e-15);
  EXPECT_TRUE(p.transport.empty());
  EXPECT_TRUE(p.tight_expected);
}

TEST(DiagPipeline, CaseTwoMirrorsWhenTheSecondProductIsLarger) {
  const auto p = diag_pipeline(0.5, 1.5, 0.5, 1.2);
  EXPECT_EQ(p.diag_case, 2);
  EXPECT_NEAR(p.eps, (1 - 2 * 0.25 * 1.8) / (4 * 1.8), 1e-15);
  ASSERT_EQ(p.transport.size(), 1u);
  EXPECT_EQ(p.transport[0].kind(), MetaplecticKind::dilation);
}

TEST(DiagPipeline, CaseThreeForRationalRatio) {
  const auto p = diag_pipeline(1.2, 0.6, 1.2, 0.6);
  EXPECT_EQ(p.diag_case, 3);
  // 1.44 / 0.36 = 144 / 36 = 4
  EXPECT_EQ(p.notes.at("sqrt_ac_over_bd").get<std::string>(), "2");
  ASSERT_TRUE(p.form);
  EXPECT_EQ(p.form->form, SeparableForm::diagonal);
  EXPECT_EQ(p.form->m, 2);
  EXPECT_EQ(p.form->n, 1);
}

TEST(DiagPipeline, NoCaseIsUnclassified) {
  // abcd = 0.825, ac / bd = 30 / 11 is not a square
  EXPECT_THROW(diag_pipeline(1.5, 0.5, 1, 1.1), Unclassified);
  EXPECT_THROW(diag_pipeline(1.3, 0.9, 1.1, 0.9), PreconditionError);
  EXPECT_THROW(diag_pipeline(-1, 0.3, 1, 1), PreconditionError);
}

TEST(DiagPipeline, EveryCaseExecutesAndPasses) {
  for (const auto& [a, b, c, d] : std::vector<std::array<double, 4>>{
           {0.9, 0.9, 0.9, 0.9}, {1.2, 0.3, 1, 1}, {1.2, 0.3, 2, 0.5}, {1.2, 0.6, 1.2, 0.6}}) {
    const auto p = diag_pipeline(a, b, c, d, coarse());
    const PipelineResult r = execute(p);
    EXPECT_TRUE(r.passed) << a << " " << b << " " << c << " " << d << " case " << p.diag_case << "\n"
                          << r.to_json().dump();
    EXPECT_TRUE(r.support_certified);
    EXPECT_GT(r.bounds.a_est, 0);
  }
}

TEST(SeparableReduce, ScalarHalfSucceeds) {
  const auto p = separable_reduce(gen(m2(0.5, 0, 0, 0.5)), GeneratorMatrix::identity(2), coarse());
  ASSERT_TRUE(p.form);
  EXPECT_EQ(p.form->form, SeparableForm::scalar);
  EXPECT_NEAR(p.gamma, 0.5, 1e-15);
  EXPECT_GT(p.eps, 0.1);
  const PipelineResult r = execute(p);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
}

TEST(SeparableReduce, NonDiagonalLatticeIsCarriedBack) {
  // B^T A = (0.2, 0.4; 0, 0.8): upper form with alpha = 0.2, n^2 = 4 and mn = 2
  const Eigen::Matrix2d b = m2(1, 0.5, 0, 1);
  const Eigen::Matrix2d bta = m2(0.2, 0.4, 0, 0.8);
  const Eigen::Matrix2d a = b.transpose().inverse() * bta;
  const auto p = separable_reduce(gen(a), gen(b), coarse());
  ASSERT_TRUE(p.form);
  EXPECT_EQ(p.form->form, SeparableForm::upper);
  EXPECT_EQ(p.form->m, 1);
  EXPECT_EQ(p.form->n, 2);
  ASSERT_EQ(p.transport.size(), 1u);
  const PipelineResult r = execute(p);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
}

TEST(SeparableReduce, UnclassifiedProduct) {
  EXPECT_THROW(separable_reduce(gen(m2(0.3 * std::sqrt(2.0), 0, 0, 0.3 / std::sqrt(2.0))),
                                GeneratorMatrix::identity(2)),
               Unclassified);
}

TEST(BlockPipeline, ChirpedCaseTwoStaysTight) {
  const Eigen::Matrix2d a = m2(1.2, 0, 0, 0.3);
  const Eigen::MatrixXd d = m2(0.3, 0.1, 0.1, -0.2) * a;
  const auto p = block_pipeline(gen(a), d, GeneratorMatrix::identity(2), coarse());
  EXPECT_EQ(p.route, "block");
  EXPECT_EQ(p.notes.at("separable_case").get<int>(), 2);
  ASSERT_EQ(p.transport.size(), 1u);
  EXPECT_EQ(p.transport.back().kind(), MetaplecticKind::chirp);
  const PipelineResult r = execute(p);
  EXPECT_FALSE(r.window.is_real());
  EXPECT_TRUE(r.passed) << r.to_json().dump();

  auto plain = p;
  plain.transport.clear();
  plain.target = plain.reduced;
  EXPECT_NEAR(execute(plain).bounds.tight_residual, r.bounds.tight_residual, 1e-5);
}

TEST(BlockPipeline, AsymmetricShearIsRejected) {
  EXPECT_THROW(block_pipeline(GeneratorMatrix::identity(2), m2(0, 1, 2, 0), GeneratorMatrix::identity(2)),
               NotReducible);
}

TEST(PipelineDescriptor, JsonRecordsCaseAndParameters) {
  const auto j = diag_pipeline(1.2, 0.3, 2, 0.5).to_json();
  EXPECT_EQ(j.at("route"), "diag");
  EXPECT_EQ(j.at("case"), 2);
  EXPECT_NEAR(j.at("eps").get<double>(), 0.28 / 4.8 / 2, 1e-15);
  EXPECT_EQ(j.at("transport").size(), 1u);
  EXPECT_EQ(j.at("transport")[0].at("kind"), "dilation");
  EXPECT_TRUE(j.at("options").contains("h"));
  EXPECT_EQ(j.dump(), diag_pipeline(1.2, 0.3, 2, 0.5).to_json().dump());
}
