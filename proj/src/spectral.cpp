#include "huberlr/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

namespace huberlr {

namespace {

// LAPACK zgesvd; `job` is 'A' (full) or 'S' (thin).
SvdFactors decompose(const CMatrix& x, char job) {
  if (!x.allFinite()) {
    throw Error(ErrorCode::ConvergenceFailure, "svd: input has non-finite entries");
  }
  const auto m = static_cast<lapack_int>(x.rows());
  const auto n = static_cast<lapack_int>(x.cols());
  const lapack_int r = std::min(m, n);
  SvdFactors f;
  f.sigma.resize(r);
  if (r == 0) {
    f.U = CMatrix::Identity(m, job == 'A' ? m : r);
    f.V = CMatrix::Identity(n, job == 'A' ? n : r);
    return f;
  }
  const lapack_int ucols = job == 'A' ? m : r;
  const lapack_int vrows = job == 'A' ? n : r;
  CMatrix a = x;
  f.U.resize(m, ucols);
  CMatrix vh(vrows, n);
  RVector superb(std::max<lapack_int>(1, r - 1));
  const lapack_int info = LAPACKE_zgesvd(
      LAPACK_COL_MAJOR, job, job, m, n, reinterpret_cast<lapack_complex_double*>(a.data()), m,
      f.sigma.data(), reinterpret_cast<lapack_complex_double*>(f.U.data()), m,
      reinterpret_cast<lapack_complex_double*>(vh.data()), vrows, superb.data());
  if (info != 0) {
    throw Error(ErrorCode::ConvergenceFailure, "svd: zgesvd returned " + std::to_string(info));
  }
  f.V = vh.adjoint();
  if (!f.sigma.allFinite() || !f.U.allFinite() || !f.V.allFinite()) {
    throw Error(ErrorCode::ConvergenceFailure, "svd: non-finite factors");
  }
  return f;
}

void require_majorizable(const SpectralRegularizer& reg) {
  if (reg.is_weighted() && !reg.weights_nondecreasing()) {
    throw Error(ErrorCode::WeightsNotNondecreasing,
                "weighted majorizers require 0 <= w_1 <= ... <= w_r");
  }
}

// Per-index curvature coefficients g_k; GR: w_k w(sigma_k), GL: w(0) w_k.
RVector curvature_coeffs(const Potential& pot, const RVector& weights, const RVector& sigma,
                         Curvature mode) {
  RVector g(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    const double omega = mode == Curvature::GR ? pot.weight(sigma(k)) : pot.weight_at_zero();
    g(k) = weights(k) * omega;
  }
  return g;
}

}  // namespace

SvdFactors svd(const CMatrix& x) { return decompose(x, 'A'); }

SvdFactors thin_svd(const CMatrix& x) { return decompose(x, 'S'); }

RVector singular_values(const CMatrix& x) {
  if (!x.allFinite()) {
    throw Error(ErrorCode::ConvergenceFailure, "svd: input has non-finite entries");
  }
  const auto m = static_cast<lapack_int>(x.rows());
  const auto n = static_cast<lapack_int>(x.cols());
  const lapack_int r = std::min(m, n);
  RVector sigma(r);
  if (r == 0) return sigma;
  CMatrix a = x;
  RVector superb(std::max<lapack_int>(1, r - 1));
  const lapack_int info =
      LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n,
                     reinterpret_cast<lapack_complex_double*>(a.data()), m, sigma.data(), nullptr,
                     1, nullptr, 1, superb.data());
  if (info != 0) {
    throw Error(ErrorCode::ConvergenceFailure, "svd: zgesvd returned " + std::to_string(info));
  }
  return sigma;
}

Curvature curvature_from_name(std::string_view name) {
  if (name == "GR" || name == "gr") return Curvature::GR;
  if (name == "GL" || name == "gl") return Curvature::GL;
  throw Error(ErrorCode::InvalidArgument, "unknown curvature '" + std::string(name) + "'");
}

const char* to_string(Curvature c) { return c == Curvature::GR ? "GR" : "GL"; }

SpectralRegularizer SpectralRegularizer::plain(Potential potential) {
  return SpectralRegularizer(potential, std::nullopt);
}

SpectralRegularizer SpectralRegularizer::weighted(Potential potential, RVector weights) {
  if (weights.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "weights must be nonempty");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
  }
  if ((weights.array() == 0.0).all()) {
    throw Error(ErrorCode::InvalidArgument, "weights must not all be zero");
  }
  return SpectralRegularizer(potential, std::move(weights));
}

SpectralRegularizer SpectralRegularizer::tail(Potential potential, Eigen::Index r,
                                              Eigen::Index k) {
  return weighted(potential, tail_weights(r, k));
}

RVector SpectralRegularizer::weights_for(Eigen::Index r) const {
  if (!weights_) return RVector::Ones(r);
  if (weights_->size() != r) {
    throw Error(ErrorCode::DimensionMismatch, "weights have length " +
                                                  std::to_string(weights_->size()) +
                                                  " but the matrix has r = " + std::to_string(r));
  }
  return *weights_;
}

double SpectralRegularizer::max_weight() const noexcept {
  return weights_ ? weights_->maxCoeff() : 1.0;
}

bool SpectralRegularizer::weights_nondecreasing() const noexcept {
  if (!weights_) return true;
  for (Eigen::Index k = 1; k < weights_->size(); ++k) {
    if ((*weights_)(k) < (*weights_)(k - 1)) return false;
  }
  return true;
}

bool SpectralRegularizer::weights_nonincreasing() const noexcept {
  if (!weights_) return true;
  for (Eigen::Index k = 1; k < weights_->size(); ++k) {
    if ((*weights_)(k) > (*weights_)(k - 1)) return false;
  }
  return true;
}

RVector tail_weights(Eigen::Index r, Eigen::Index k) {
  if (r < 1 || k < 0 || k > r - 1) {
    throw Error(ErrorCode::KOutOfRange,
                "tail K = " + std::to_string(k) + " outside [0, " + std::to_string(r - 1) + "]");
  }
  RVector w = RVector::Ones(r);
  w.head(k).setZero();
  return w;
}

double reg_value(const SpectralRegularizer& reg, const CMatrix& x) {
  const RVector sigma = singular_values(x);
  const RVector w = reg.weights_for(sigma.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) total += w(k) * reg.potential().value(sigma(k));
  return total;
}

CMatrix reg_grad(const SpectralRegularizer& reg, const CMatrix& x) {
  return SpectralPoint(reg, x).gradient();
}

bool is_convex(const SpectralRegularizer& reg) {
  return reg.potential().is_convex() && reg.weights_nonincreasing();
}

double lipschitz_bound(const SpectralRegularizer& reg) {
  return reg.max_weight() * reg.potential().weight_at_zero();
}

RMatrix curvature_matrix(const SpectralRegularizer& reg, const SvdFactors& factors,
                         Curvature mode) {
  require_majorizable(reg);
  const Eigen::Index m = factors.U.rows();
  const Eigen::Index n = factors.V.rows();
  const RVector w = reg.weights_for(factors.sigma.size());
  const RVector g = curvature_coeffs(reg.potential(), w, factors.sigma, mode);
  if (m <= n) return g * RVector::Ones(n).transpose();
  return RVector::Ones(m) * g.transpose();
}

double majorizer_value(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& s,
                       Curvature mode) {
  require_same_shape(x, s, "majorizer_value");
  const SvdFactors f = svd(s);
  const RMatrix g = curvature_matrix(reg, f, mode);
  const CMatrix diff = x - s;
  const RMatrix energy = (f.U.adjoint() * diff * f.V).cwiseAbs2();

  const Eigen::Index r = f.sigma.size();
  const RVector w = reg.weights_for(r);
  double value = 0.0;
  CMatrix grad = CMatrix::Zero(s.rows(), s.cols());
  for (Eigen::Index k = 0; k < r; ++k) {
    value += w(k) * reg.potential().value(f.sigma(k));
    grad += (w(k) * reg.potential().deriv(f.sigma(k))) * f.U.col(k) * f.V.col(k).adjoint();
  }
  return value + real_inner(grad, diff) + 0.5 * g.cwiseProduct(energy).sum();
}

SpectralPoint::SpectralPoint(const SpectralRegularizer& reg, const CMatrix& x)
    : potential_(reg.potential()),
      weighted_(reg.is_weighted()),
      nondecreasing_(reg.weights_nondecreasing()),
      factors_(thin_svd(x)),
      wide_(x.rows() <= x.cols()) {
  const Eigen::Index r = factors_.sigma.size();
  weights_ = reg.weights_for(r);
  grad_coeffs_.resize(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const double s = factors_.sigma(k);
    value_ += weights_(k) * potential_.value(s);
    grad_coeffs_(k) = weights_(k) * potential_.deriv(s);
  }
}

void SpectralPoint::check_direction(const CMatrix& d) const {
  if (d.rows() != factors_.U.rows() || d.cols() != factors_.V.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "direction shape differs from the expansion point");
  }
}

CMatrix SpectralPoint::gradient() const {
  return factors_.U * grad_coeffs_.asDiagonal() * factors_.V.adjoint();
}

double SpectralPoint::directional(const CMatrix& d) const {
  check_direction(d);
  // Re tr(V diag(c) U^H D) = sum_k c_k Re(u_k^H D v_k).
  double total = 0.0;
  if (wide_) {
    const CMatrix ud = factors_.U.adjoint() * d;
    for (Eigen::Index k = 0; k < grad_coeffs_.size(); ++k) {
      total += grad_coeffs_(k) * (ud.row(k) * factors_.V.col(k))(0).real();
    }
  } else {
    const CMatrix dv = d * factors_.V;
    for (Eigen::Index k = 0; k < grad_coeffs_.size(); ++k) {
      total += grad_coeffs_(k) * factors_.U.col(k).dot(dv.col(k)).real();
    }
  }
  return total;
}

double SpectralPoint::curvature(const CMatrix& d, Curvature mode) const {
  check_direction(d);
  if (weighted_ && !nondecreasing_) {
    throw Error(ErrorCode::WeightsNotNondecreasing,
                "weighted majorizers require 0 <= w_1 <= ... <= w_r");
  }
  const RVector g = curvature_coeffs(potential_, weights_, factors_.sigma, mode);
  if (!weighted_ && mode == Curvature::GL) return potential_.weight_at_zero() * d.squaredNorm();
  // Wide: U is square, rows of U^H D carry the weights. Tall: V is square.
  if (wide_) return (factors_.U.adjoint() * d).rowwise().squaredNorm().dot(g);
  return (d * factors_.V).colwise().squaredNorm().transpose().dot(g);
}

}  // namespace huberlr
