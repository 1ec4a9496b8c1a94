#pragma once

#include <functional>

#include "huberlr/spectral.hpp"

namespace huberlr {

/// g(a) = c0 + c1 (a - center) + c2/2 (a - center)^2, a quadratic majorizer of
/// a line-search function expanded at `center`.
struct LineQuadratic {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double center = 0.0;

  double operator()(double alpha) const noexcept {
    const double d = alpha - center;
    return c0 + c1 * d + 0.5 * c2 * d * d;
  }
  /// center - c1/c2; the center itself when c2 = 0.
  double minimizer() const noexcept { return c2 > 0.0 ? center - c1 / c2 : center; }
};

/// Majorizer of a -> R(X + a D) at abar, built from one SVD of X + abar D.
LineQuadratic reg_line_coeffs(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& d,
                              double abar, Curvature mode);

/// Componentwise qf + lambda * qreg. Throws CenterMismatch.
LineQuadratic combine_line_coeffs(const LineQuadratic& qf, const LineQuadratic& qreg,
                                  double lambda);

using CoeffProvider = std::function<LineQuadratic(double)>;

/// n_alpha majorize-minimize iterations a <- a - c1(a)/c2(a) from alpha0.
/// Stops at the current a if the curvature vanishes. Throws NonFinite.
double mm_step(const CoeffProvider& coeffs, double alpha0, int n_alpha);

}  // namespace huberlr
