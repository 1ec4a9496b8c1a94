#include "huberlr/linesearch.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "huberlr/model.hpp"
#include "test_support.hpp"

namespace huberlr {
namespace {

using testing::random_matrix;

RVector increasing_weights(Eigen::Index r) {
  RVector w(r);
  for (Eigen::Index k = 0; k < r; ++k) w(k) = 0.25 * static_cast<double>(k);
  return w;
}

TEST(RegLineCoeffs, ZeroDirection) {
  std::mt19937_64 rng(41);
  const auto reg = SpectralRegularizer::plain(Potential::hyperbola(0.2));
  const CMatrix x = random_matrix(rng, 4, 6);
  const auto q = reg_line_coeffs(reg, x, CMatrix::Zero(4, 6), 0.7, Curvature::GR);
  EXPECT_EQ(q.c1, 0.0);
  EXPECT_EQ(q.c2, 0.0);
  EXPECT_NEAR(q.c0, reg_value(reg, x), 1e-12 * q.c0);
  EXPECT_EQ(q.center, 0.7);
}

TEST(RegLineCoeffs, MajorizesAlongTheLine) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> centers(-2.0, 2.0);
  const Potential pots[] = {Potential::hyperbola(0.1), Potential::cauchy(0.5), Potential::parabola()};
  for (int trial = 0; trial < 30; ++trial) {
    const Potential& p = pots[trial % 3];
    const int m = 2 + trial % 5, n = 3 + (trial * 7) % 4;
    const auto reg = trial % 2 ? SpectralRegularizer::plain(p)
                               : SpectralRegularizer::weighted(p, increasing_weights(std::min(m, n)) +
                                                                      RVector::Constant(std::min(m, n), 0.1));
    const CMatrix x = random_matrix(rng, m, n);
    const CMatrix d = random_matrix(rng, m, n);
    const double abar = centers(rng);
    const auto gr = reg_line_coeffs(reg, x, d, abar, Curvature::GR);
    const auto gl = reg_line_coeffs(reg, x, d, abar, Curvature::GL);
    const double h_center = reg_value(reg, x + abar * d);
    EXPECT_EQ(gr(abar), gr.c0);
    EXPECT_NEAR(gr.c0, h_center, 1e-12 * std::max(1.0, h_center));
    EXPECT_LE(gr.c2, gl.c2 * (1 + 1e-12));
    EXPECT_GE(gr.c2, 0.0);
    for (int i = 0; i <= 400; ++i) {
      const double a = -5.0 + 10.0 * i / 400.0;
      const double h = reg_value(reg, x + a * d);
      const double slack = 1e-9 * std::max(1.0, std::abs(h));
      ASSERT_GE(gr(a), h - slack) << p.name() << " trial " << trial << " a=" << a;
      ASSERT_GE(gl(a), h - slack) << p.name() << " trial " << trial << " a=" << a;
    }
  }
}

TEST(RegLineCoeffs, ShapeMismatch) {
  const auto reg = SpectralRegularizer::plain(Potential::parabola());
  EXPECT_THROW(reg_line_coeffs(reg, CMatrix::Ones(2, 3), CMatrix::Ones(3, 2), 0.0, Curvature::GR),
               Error);
}

TEST(CombineLineCoeffs, Linearity) {
  const LineQuadratic qf{1.5, -2.0, 3.0, 0.25};
  const LineQuadratic qr{0.5, 4.0, 7.0, 0.25};
  const auto zero = combine_line_coeffs(qf, qr, 0.0);
  EXPECT_EQ(zero.c0, qf.c0);
  EXPECT_EQ(zero.c1, qf.c1);
  EXPECT_EQ(zero.c2, qf.c2);
  const auto with_zero_reg = combine_line_coeffs(qf, LineQuadratic{0, 0, 0, 0.25}, 1.0);
  EXPECT_EQ(with_zero_reg.c0, qf.c0);
  EXPECT_EQ(with_zero_reg.c2, qf.c2);

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const LineQuadratic a{u(rng), u(rng), std::abs(u(rng)), 1.0};
    const LineQuadratic b{u(rng), u(rng), std::abs(u(rng)), 1.0};
    const double lambda = std::abs(u(rng));
    const auto c = combine_line_coeffs(a, b, lambda);
    EXPECT_EQ(c.c0, a.c0 + lambda * b.c0);
    EXPECT_EQ(c.c1, a.c1 + lambda * b.c1);
    EXPECT_EQ(c.c2, a.c2 + lambda * b.c2);
    EXPECT_EQ(c.center, 1.0);
  }
}

TEST(CombineLineCoeffs, Errors) {
  try {
    combine_line_coeffs(LineQuadratic{0, 0, 0, 0.0}, LineQuadratic{0, 0, 0, 1e-9}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CenterMismatch);
  }
  EXPECT_THROW(combine_line_coeffs(LineQuadratic{}, LineQuadratic{}, -1.0), Error);
}

TEST(LineQuadratic, MinimizerIsClosedForm) {
  const LineQuadratic q{2.0, 3.0, 4.0, 1.0};
  EXPECT_DOUBLE_EQ(q.minimizer(), 1.0 - 3.0 / 4.0);
  EXPECT_EQ((LineQuadratic{2.0, 3.0, 0.0, 1.0}).minimizer(), 1.0);
  const double a = q.minimizer();
  EXPECT_LE(q(a), q(a + 1e-3));
  EXPECT_LE(q(a), q(a - 1e-3));
}

TEST(MmStep, ExactForPureQuadratic) {
  std::mt19937_64 rng(44);
  const CMatrix x = random_matrix(rng, 5, 4);
  const CMatrix y = random_matrix(rng, 5, 4);
  const CMatrix d = random_matrix(rng, 5, 4);
  const IdentityOperator id(5, 4);
  const CoeffProvider provider = [&](double a) { return f_line_coeffs(id, y, x, d, a); };
  const double expected = real_inner(y - x, d) / d.squaredNorm();
  for (double a0 : {0.0, -3.0, 10.0}) {
    EXPECT_NEAR(mm_step(provider, a0, 1), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(MmStep, ZeroCurvatureKeepsCurrentStep) {
  const CMatrix x = CMatrix::Ones(3, 3);
  const auto reg = SpectralRegularizer::plain(Potential::hyperbola(1.0));
  const CoeffProvider provider = [&](double a) {
    return reg_line_coeffs(reg, x, CMatrix::Zero(3, 3), a, Curvature::GR);
  };
  EXPECT_EQ(mm_step(provider, 0.0, 1), 0.0);
  EXPECT_EQ(mm_step(provider, 0.75, 5), 0.75);
}

TEST(MmStep, Errors) {
  const CoeffProvider nan_provider = [](double a) {
    return LineQuadratic{0.0, std::numeric_limits<double>::quiet_NaN(), 1.0, a};
  };
  const CoeffProvider tiny_curvature = [](double a) { return LineQuadratic{0.0, 1.0, 1e-320, a}; };
  const CoeffProvider fine = [](double a) { return LineQuadratic{0.0, a - 1.0, 1.0, a}; };
  for (const auto& [provider, a0] : {std::pair{nan_provider, 0.0}, std::pair{tiny_curvature, 0.0},
                                     std::pair{fine, std::numeric_limits<double>::infinity()}}) {
    try {
      mm_step(provider, a0, 1);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
  }
  EXPECT_THROW(mm_step(fine, 0.0, 0), Error);
  EXPECT_DOUBLE_EQ(mm_step(fine, 0.0, 1), 1.0);
}

TEST(MmStep, CompositeCostDoesNotIncrease) {
  std::mt19937_64 rng(45);
  const IdentityOperator id(6, 5);
  const Potential pots[] = {Potential::hyperbola(0.05), Potential::cauchy(0.3), Potential::parabola()};
  for (int trial = 0; trial < 30; ++trial) {
    const auto reg = trial % 2 ? SpectralRegularizer::plain(pots[trial % 3])
                               : SpectralRegularizer::tail(pots[trial % 3], 5, 1);
    const CMatrix x = random_matrix(rng, 6, 5);
    const CMatrix y = random_matrix(rng, 6, 5);
    const CMatrix d = -random_matrix(rng, 6, 5);
    const double lambda = 0.5 + trial % 4;
    const auto h = [&](double a) {
      return f_value(id, y, x + a * d) + lambda * reg_value(reg, x + a * d);
    };
    for (auto mode : {Curvature::GR, Curvature::GL}) {
      const CoeffProvider provider = [&](double a) {
        return combine_line_coeffs(f_line_coeffs(id, y, x, d, a),
                                   reg_line_coeffs(reg, x, d, a, mode), lambda);
      };
      for (int n_alpha : {1, 3}) {
        const double alpha = mm_step(provider, 0.0, n_alpha);
        EXPECT_LE(h(alpha), h(0.0) + 1e-12) << "trial " << trial;
      }
      // Every intermediate iterate descends as well.
      double a = 0.0, prev = h(0.0);
      for (int l = 0; l < 5; ++l) {
        a = mm_step(provider, a, 1);
        ASSERT_LE(h(a), prev + 1e-12 * std::max(1.0, prev));
        prev = h(a);
      }
    }
  }
}

}  // namespace
}  // namespace huberlr
