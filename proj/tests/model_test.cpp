#include "huberlr/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"

namespace huberlr {
namespace {

using testing::central_difference;
using testing::random_matrix;
using testing::relative_error;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no huberlr::Error thrown";
  return ErrorCode::InvalidArgument;
}

// Unitary 2D DFT by direct summation, x-fastest storage.
CVector naive_dft(const CVector& img, int mx, int my, int sign) {
  CVector out = CVector::Zero(img.size());
  for (int ky = 0; ky < my; ++ky)
    for (int kx = 0; kx < mx; ++kx)
      for (int y = 0; y < my; ++y)
        for (int x = 0; x < mx; ++x) {
          const double ph = sign * 2.0 * std::numbers::pi *
                            (static_cast<double>(kx * x) / mx + static_cast<double>(ky * y) / my);
          out(kx + mx * ky) += img(x + mx * y) * std::polar(1.0, ph);
        }
  return out / std::sqrt(static_cast<double>(mx * my));
}

CMatrix naive_apply(const CMatrix& x, int mx, int my, const CMatrix& coils, const MaskMatrix& masks) {
  const Eigen::Index m = x.rows();
  CMatrix y = CMatrix::Zero(m * coils.cols(), x.cols());
  for (Eigen::Index n = 0; n < x.cols(); ++n)
    for (Eigen::Index c = 0; c < coils.cols(); ++c) {
      const CVector k = naive_dft(coils.col(c).cwiseProduct(x.col(n)), mx, my, -1);
      for (Eigen::Index i = 0; i < m; ++i)
        if (masks(i, n)) y(c * m + i, n) = k(i);
    }
  return y;
}

MaskMatrix random_mask(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n, double p) {
  std::bernoulli_distribution b(p);
  MaskMatrix mask(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) mask(i, j) = b(rng) ? 1 : 0;
  return mask;
}

struct SmallMri {
  int mx = 6, my = 4, frames = 3, coils = 2;
  CMatrix coil_maps;
  MaskMatrix masks;
  MriOperator op;
  SmallMri(std::mt19937_64& rng, double density)
      : coil_maps(random_matrix(rng, 24, 2)), masks(random_mask(rng, 24, 3, density)),
        op(6, 4, coil_maps, masks) {}
};

TEST(UnitaryFft2, MatchesDirectSumAndPreservesNorm) {
  std::mt19937_64 rng(71);
  for (auto [mx, my] : {std::pair{4, 3}, std::pair{8, 8}, std::pair{5, 2}}) {
    const UnitaryFft2 fft(mx, my);
    const CVector x = random_matrix(rng, mx * my, 1);
    const CVector k = fft.forward(x);
    EXPECT_LE((k - naive_dft(x, mx, my, -1)).norm(), 1e-12 * x.norm());
    EXPECT_LE(std::abs(k.norm() - x.norm()), 1e-12 * x.norm());
    EXPECT_LE((fft.inverse(k) - x).norm(), 1e-12 * x.norm());
  }
}

TEST(MriOperator, MatchesDirectEvaluation) {
  std::mt19937_64 rng(72);
  SmallMri s(rng, 0.5);
  const CMatrix x = random_matrix(rng, 24, 3);
  EXPECT_LE(relative_error(s.op.apply(x), naive_apply(x, s.mx, s.my, s.coil_maps, s.masks)), 1e-12);
  EXPECT_EQ(s.op.output_rows(), 48);
  EXPECT_EQ(s.op.frames(), 3);
}

TEST(MriOperator, AdjointDotTestAndLinearity) {
  std::mt19937_64 rng(73);
  SmallMri s(rng, 0.4);
  for (int i = 0; i < 10; ++i) {
    const CMatrix x = random_matrix(rng, 24, 3);
    const CMatrix x2 = random_matrix(rng, 24, 3);
    const CMatrix z = random_matrix(rng, 48, 3);
    const Complex lhs = s.op.apply(x).cwiseProduct(z.conjugate()).sum();
    const Complex rhs = x.cwiseProduct(s.op.adjoint(z).conjugate()).sum();
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
    const Complex a(0.3, -1.2), b(2.0, 0.5);
    EXPECT_LE(relative_error(s.op.apply(a * x + b * x2), a * s.op.apply(x) + b * s.op.apply(x2)), 1e-12);
  }
}

TEST(MriOperator, UnsampledEntriesAreZero) {
  std::mt19937_64 rng(74);
  SmallMri s(rng, 0.3);
  const CMatrix y = s.op.apply(random_matrix(rng, 24, 3));
  for (Eigen::Index n = 0; n < 3; ++n)
    for (Eigen::Index c = 0; c < 2; ++c)
      for (Eigen::Index i = 0; i < 24; ++i)
        if (!s.masks(i, n)) EXPECT_EQ(y(c * 24 + i, n), Complex(0.0));
}

TEST(MriOperator, ConstructorValidation) {
  const CMatrix coils = CMatrix::Ones(16, 2);
  MaskMatrix masks = MaskMatrix::Ones(16, 3);
  EXPECT_EQ(code_of([&] { MriOperator(4, 4, CMatrix::Ones(15, 2), masks); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { MriOperator(4, 4, coils, MaskMatrix::Ones(16, 0)); }), ErrorCode::DimensionMismatch);
  masks(3, 1) = 2;
  EXPECT_EQ(code_of([&] { MriOperator(4, 4, coils, masks); }), ErrorCode::InvalidArgument);
  const MriOperator ok(4, 4, coils, MaskMatrix::Ones(16, 3));
  EXPECT_EQ(code_of([&] { ok.apply(CMatrix::Zero(16, 2)); }), ErrorCode::DimensionMismatch);
}

TEST(DataConsistency, ValueExamples) {
  std::mt19937_64 rng(75);
  SmallMri s(rng, 0.5);
  const CMatrix truth = random_matrix(rng, 24, 3);
  const CMatrix y = s.op.apply(truth);
  EXPECT_LE(f_value(s.op, y, truth), 1e-24 * y.squaredNorm());
  EXPECT_DOUBLE_EQ(f_value(s.op, y, CMatrix::Zero(24, 3)), 0.5 * y.squaredNorm());

  const CMatrix noisy = y + random_matrix(rng, 48, 3, 0.1);
  const CMatrix x = random_matrix(rng, 24, 3);
  const CMatrix r = naive_apply(x, s.mx, s.my, s.coil_maps, s.masks) - noisy;
  double direct = 0.0;
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) direct += 0.5 * std::norm(r(i, j));
  EXPECT_LE(relative_error(f_value(s.op, noisy, x), direct), 1e-12);
  EXPECT_EQ(code_of([&] { f_value(s.op, CMatrix::Zero(47, 3), x); }), ErrorCode::DimensionMismatch);
}

TEST(DataConsistency, GradientExamples) {
  std::mt19937_64 rng(76);
  SmallMri s(rng, 0.5);
  const CMatrix truth = random_matrix(rng, 24, 3);
  const CMatrix y = s.op.apply(truth);
  EXPECT_LE(f_grad(s.op, y, truth).norm(), 1e-12 * truth.norm());
  EXPECT_LE(relative_error(f_grad(s.op, y, CMatrix::Zero(24, 3)), -s.op.adjoint(y)), 1e-15);

  const CMatrix noisy = y + random_matrix(rng, 48, 3, 0.1);
  for (int i = 0; i < 10; ++i) {
    const CMatrix x = random_matrix(rng, 24, 3);
    const CMatrix d = random_matrix(rng, 24, 3);
    const double fd = central_difference([&](double a) { return f_value(s.op, noisy, x + a * d); }, 1e-3);
    EXPECT_LE(relative_error(fd, real_inner(f_grad(s.op, noisy, x), d)), 1e-6);
  }
}

TEST(DataConsistency, LineCoefficientsAreExact) {
  std::mt19937_64 rng(77);
  SmallMri s(rng, 0.5);
  const CMatrix y = random_matrix(rng, 48, 3);
  const CMatrix x = random_matrix(rng, 24, 3);
  const CMatrix d = random_matrix(rng, 24, 3);
  const auto zero = f_line_coeffs(s.op, y, x, CMatrix::Zero(24, 3), 0.5);
  EXPECT_EQ(zero.c1, 0.0);
  EXPECT_EQ(zero.c2, 0.0);
  const auto q = f_line_coeffs(s.op, y, x, d, 0.5);
  const auto q2 = f_line_coeffs(s.op, y, x, d, -1.7);
  EXPECT_LE(relative_error(q.c2, q2.c2), 1e-12);
  EXPECT_LE(relative_error(q.c2, s.op.apply(d).squaredNorm()), 1e-12);
  for (int i = 0; i <= 40; ++i) {
    const double a = -4.0 + 0.2 * i;
    const double h = f_value(s.op, y, x + a * d);
    EXPECT_LE(relative_error(q(a), h), 1e-10);
    EXPECT_LE(relative_error(q2(a), h), 1e-10);
  }
}

TEST(Synthetic, FullySampledNoiselessIsConsistent) {
  SyntheticParams sp;
  sp.image_x = 16;
  sp.image_y = 8;
  sp.frames = 4;
  sp.acceleration = 1.0;
  sp.noise_sigma = 0.0;
  const auto p = generate_synthetic(sp, PatchGeometry(16, 8, 4, 4));
  ASSERT_TRUE(p.truth);
  EXPECT_EQ(p.mri()->masks(), MaskMatrix::Ones(128, 4));
  EXPECT_LE(f_value(p, *p.truth), 1e-24 * p.truth->squaredNorm());
  EXPECT_LE(relative_error(p.op->adjoint(p.data), *p.truth), 1e-12);
}

TEST(Synthetic, DeterministicGivenSeed) {
  SyntheticParams sp;
  sp.seed = 99;
  const PatchGeometry g(32, 32, 4, 4);
  const auto a = generate_synthetic(sp, g);
  const auto b = generate_synthetic(sp, g);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(*a.truth, *b.truth);
  EXPECT_EQ(a.mri()->masks(), b.mri()->masks());
  EXPECT_EQ(a.mri()->coils(), b.mri()->coils());
  sp.seed = 100;
  EXPECT_NE(generate_synthetic(sp, g).data, a.data);
}

TEST(Synthetic, StructureOfDefaults) {
  const SyntheticParams sp;
  const PatchGeometry g(32, 32, 4, 4);
  const auto p = generate_synthetic(sp, g);
  p.validate();
  const MriOperator& op = *p.mri();
  ASSERT_EQ(p.truth->rows(), 1024);
  ASSERT_EQ(p.truth->cols(), 8);
  EXPECT_EQ(op.coil_count(), 4);

  for (Eigen::Index i = 0; i < 1024; ++i) EXPECT_NEAR(op.coils().row(i).squaredNorm(), 1.0, 1e-12);

  const MaskMatrix& masks = op.masks();
  for (Eigen::Index i = 0; i < 1024; ++i) ASSERT_GT(masks.row(i).cast<int>().sum(), 0);
  EXPECT_TRUE((masks.array() <= 1).all());
  for (Eigen::Index n = 0; n < 8; ++n) {
    const double fraction = masks.col(n).cast<double>().sum() / 1024.0;
    EXPECT_GT(fraction, 0.2);
    EXPECT_LT(fraction, 0.32);
    EXPECT_EQ(masks(0, n), 1);  // DC
  }

  const auto tol = 1e-9 * singular_values(*p.truth)(0);
  EXPECT_LT(singular_values(*p.truth)(3), tol);
  for (const auto& loc : g.locations()) {
    EXPECT_LT(singular_values(extract_patch(*p.truth, loc, g))(3), tol);
  }
}

TEST(Synthetic, Rejections) {
  SyntheticParams sp;
  sp.acceleration = 9.0;
  EXPECT_EQ(code_of([&] { generate_synthetic(sp, PatchGeometry(32, 32, 4, 4)); }), ErrorCode::InfeasibleMask);
  sp.acceleration = 4.0;
  EXPECT_EQ(code_of([&] { generate_synthetic(sp, PatchGeometry(16, 32, 4, 4)); }), ErrorCode::DimensionMismatch);
  sp.acceleration = 0.5;
  EXPECT_EQ(code_of([&] { generate_synthetic(sp, PatchGeometry(32, 32, 4, 4)); }), ErrorCode::InvalidArgument);
}

TEST(Problem, Validate) {
  auto p = generate_synthetic(SyntheticParams{.image_x = 8, .image_y = 8, .frames = 4},
                              PatchGeometry(8, 8, 2, 2));
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.data = CMatrix::Zero(3, 4);
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::DimensionMismatch);
  bad = p;
  bad.geometry = PatchGeometry(4, 4, 2, 2);
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::DimensionMismatch);
  bad = p;
  bad.lambda = -1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
}

TEST(Datashare, FullySampledEqualsAdjoint) {
  std::mt19937_64 rng(78);
  const MriOperator op(4, 4, random_matrix(rng, 16, 2), MaskMatrix::Ones(16, 3));
  const CMatrix y = op.apply(random_matrix(rng, 16, 3));
  EXPECT_LE(relative_error(datashare_init(op, y), op.adjoint(y)), 1e-14);
}

TEST(Datashare, SingleSampledFrameFillsAll) {
  std::mt19937_64 rng(79);
  MaskMatrix masks = MaskMatrix::Zero(16, 4);
  masks.col(2).setOnes();
  const MriOperator op(4, 4, random_matrix(rng, 16, 2), masks);
  const CMatrix x = datashare_init(op, op.apply(random_matrix(rng, 16, 4)));
  for (int n = 0; n < 4; ++n) EXPECT_EQ(x.col(n), x.col(2));
}

TEST(Datashare, NearestFrameWithEarlierTieBreak) {
  // Location 1 is missing in frames 1 and 3; frame 1 is equidistant from 0 and 2.
  MaskMatrix masks = MaskMatrix::Ones(4, 4);
  masks(1, 1) = 0;
  masks(1, 3) = 0;
  const MriOperator op(2, 2, CMatrix::Ones(4, 1), masks);
  CMatrix y = CMatrix::Zero(4, 4);
  for (int n = 0; n < 4; ++n) y(1, n) = Complex(10.0 * (n + 1), 0.0);
  CMatrix expected = y;
  expected(1, 1) = y(1, 0);
  expected(1, 3) = y(1, 2);
  EXPECT_LE(relative_error(datashare_init(op, op.apply(op.adjoint(y))), op.adjoint_unmasked(expected)), 1e-14);
}

TEST(Datashare, BeatsZeroOnSyntheticAndRejectsHoles) {
  const auto p = generate_synthetic(SyntheticParams{}, PatchGeometry(32, 32, 4, 4));
  const CMatrix x0 = datashare_init(p);
  EXPECT_LT((x0 - *p.truth).norm() / p.truth->norm(), 1.0);

  MaskMatrix masks = MaskMatrix::Ones(4, 2);
  masks.row(3).setZero();
  const MriOperator holes(2, 2, CMatrix::Ones(4, 1), masks);
  EXPECT_EQ(code_of([&] { datashare_init(holes, CMatrix::Zero(4, 2)); }), ErrorCode::InfeasibleMask);
}

}  // namespace
}  // namespace huberlr
