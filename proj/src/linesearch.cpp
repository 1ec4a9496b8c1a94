#include "huberlr/linesearch.hpp"

#include <cmath>
#include <string>

namespace huberlr {

LineQuadratic reg_line_coeffs(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& d,
                              double abar, Curvature mode) {
  require_same_shape(x, d, "reg_line_coeffs");
  const SpectralPoint point(reg, x + abar * d);
  return {point.value(), point.directional(d), point.curvature(d, mode), abar};
}

LineQuadratic combine_line_coeffs(const LineQuadratic& qf, const LineQuadratic& qreg,
                                  double lambda) {
  if (qf.center != qreg.center) {
    throw Error(ErrorCode::CenterMismatch, "line quadratics expanded at " +
                                               std::to_string(qf.center) + " and " +
                                               std::to_string(qreg.center));
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  }
  return {qf.c0 + lambda * qreg.c0, qf.c1 + lambda * qreg.c1, qf.c2 + lambda * qreg.c2,
          qf.center};
}

double mm_step(const CoeffProvider& coeffs, double alpha0, int n_alpha) {
  if (n_alpha < 1) throw Error(ErrorCode::InvalidArgument, "n_alpha must be >= 1");
  if (!std::isfinite(alpha0)) throw Error(ErrorCode::NonFinite, "initial step is not finite");
  double alpha = alpha0;
  for (int l = 0; l < n_alpha; ++l) {
    const LineQuadratic q = coeffs(alpha);
    if (!std::isfinite(q.c1) || !std::isfinite(q.c2)) {
      throw Error(ErrorCode::NonFinite, "line-search coefficients are not finite");
    }
    if (q.c2 <= 0.0) return alpha;
    alpha -= q.c1 / q.c2;
    if (!std::isfinite(alpha)) throw Error(ErrorCode::NonFinite, "step size is not finite");
  }
  return alpha;
}

}  // namespace huberlr
