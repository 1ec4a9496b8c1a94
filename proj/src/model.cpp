#include "huberlr/model.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include <fftw3.h>

namespace huberlr {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Centered frequency index in (-m/2, m/2].
int centered(int k, int m) { return k <= m / 2 ? k : k - m; }

}  // namespace

CMatrix IdentityOperator::apply(const CMatrix& x) const {
  if (x.rows() != rows_ || x.cols() != frames_) {
    throw Error(ErrorCode::DimensionMismatch, "identity operator input shape");
  }
  return x;
}

CMatrix IdentityOperator::adjoint(const CMatrix& y) const { return apply(y); }

UnitaryFft2::UnitaryFft2(int mx, int my) : mx_(mx), my_(my) {
  if (mx < 1 || my < 1) throw Error(ErrorCode::InvalidArgument, "FFT dimensions must be positive");
  CVector scratch_in(Eigen::Index{mx} * my), scratch_out(Eigen::Index{mx} * my);
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  const std::lock_guard lock(planner_mutex());
  // x is the fastest index, so FFTW's row-major dims are (my, mx).
  forward_plan_ = fftw_plan_dft_2d(my, mx, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_2d(my, mx, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "could not create FFT plans");
  }
}

UnitaryFft2::~UnitaryFft2() {
  const std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

CVector UnitaryFft2::run(const CVector& in, void* plan) const {
  if (in.size() != Eigen::Index{mx_} * my_) {
    throw Error(ErrorCode::DimensionMismatch, "FFT input length");
  }
  CVector src = in;
  CVector out(in.size());
  fftw_execute_dft(static_cast<fftw_plan>(plan), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= std::sqrt(static_cast<double>(in.size()));
  return out;
}

CVector UnitaryFft2::forward(const CVector& image) const { return run(image, forward_plan_); }
CVector UnitaryFft2::inverse(const CVector& kspace) const { return run(kspace, inverse_plan_); }

MriOperator::MriOperator(int mx, int my, CMatrix coils, MaskMatrix masks)
    : mx_(mx),
      my_(my),
      voxels_(Eigen::Index{mx} * my),
      coils_(std::move(coils)),
      masks_(std::move(masks)),
      fft_(std::make_shared<UnitaryFft2>(mx, my)) {
  if (coils_.rows() != voxels_ || coils_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "coil maps must be M x C with C >= 1");
  }
  if (masks_.rows() != voxels_ || masks_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "masks must be M x N with N >= 1");
  }
  if ((masks_.array() > 1).any()) {
    throw Error(ErrorCode::InvalidArgument, "masks must be binary");
  }
}

CMatrix MriOperator::apply(const CMatrix& x) const {
  if (x.rows() != voxels_ || x.cols() != frames()) {
    throw Error(ErrorCode::DimensionMismatch, "MRI operator input must be M x N");
  }
  CMatrix y = CMatrix::Zero(output_rows(), frames());
  for (Eigen::Index n = 0; n < frames(); ++n) {
    for (Eigen::Index c = 0; c < coil_count(); ++c) {
      const CVector k = fft_->forward(coils_.col(c).cwiseProduct(x.col(n)));
      auto block = y.col(n).segment(c * voxels_, voxels_);
      for (Eigen::Index i = 0; i < voxels_; ++i) {
        if (masks_(i, n) != 0) block(i) = k(i);
      }
    }
  }
  return y;
}

CMatrix MriOperator::adjoint(const CMatrix& y) const {
  if (y.rows() != output_rows() || y.cols() != frames()) {
    throw Error(ErrorCode::DimensionMismatch, "MRI operator adjoint input must be S x N");
  }
  CMatrix masked = y;
  for (Eigen::Index n = 0; n < frames(); ++n) {
    for (Eigen::Index c = 0; c < coil_count(); ++c) {
      for (Eigen::Index i = 0; i < voxels_; ++i) {
        if (masks_(i, n) == 0) masked(c * voxels_ + i, n) = 0.0;
      }
    }
  }
  return adjoint_unmasked(masked);
}

CMatrix MriOperator::adjoint_unmasked(const CMatrix& y) const {
  if (y.rows() != output_rows()) {
    throw Error(ErrorCode::DimensionMismatch, "MRI operator adjoint input must be S x N");
  }
  CMatrix x = CMatrix::Zero(voxels_, y.cols());
  for (Eigen::Index n = 0; n < y.cols(); ++n) {
    for (Eigen::Index c = 0; c < coil_count(); ++c) {
      const CVector img = fft_->inverse(y.col(n).segment(c * voxels_, voxels_));
      x.col(n) += coils_.col(c).conjugate().cwiseProduct(img);
    }
  }
  return x;
}

void ReconstructionProblem::validate() const {
  if (!op) throw Error(ErrorCode::InvalidArgument, "problem has no forward operator");
  if (data.rows() != op->output_rows() || data.cols() != op->frames()) {
    throw Error(ErrorCode::DimensionMismatch, "data shape does not match the operator");
  }
  if (truth && (truth->rows() != op->input_rows() || truth->cols() != op->frames())) {
    throw Error(ErrorCode::DimensionMismatch, "truth shape does not match the operator");
  }
  if (geometry.voxels() != op->input_rows()) {
    throw Error(ErrorCode::DimensionMismatch, "patch geometry does not match the image size");
  }
  if (lambda && !(*lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

double f_value(const LinearOperator& op, const CMatrix& y, const CMatrix& x) {
  const CMatrix r = op.apply(x);
  require_same_shape(r, y, "f_value");
  return 0.5 * (r - y).squaredNorm();
}

CMatrix f_grad(const LinearOperator& op, const CMatrix& y, const CMatrix& x) {
  const CMatrix r = op.apply(x);
  require_same_shape(r, y, "f_grad");
  return op.adjoint(r - y);
}

LineQuadratic f_line_coeffs(const LinearOperator& op, const CMatrix& y, const CMatrix& x,
                            const CMatrix& d, double abar) {
  require_same_shape(x, d, "f_line_coeffs");
  const CMatrix r = op.apply(x + abar * d);
  require_same_shape(r, y, "f_line_coeffs");
  const CMatrix ad = op.apply(d);
  const CMatrix res = r - y;
  return {0.5 * res.squaredNorm(), real_inner(res, ad), ad.squaredNorm(), abar};
}

ReconstructionProblem generate_synthetic(const SyntheticParams& params,
                                         const PatchGeometry& geometry) {
  const int mx = params.image_x, my = params.image_y, nf = params.frames, nc = params.coils;
  if (mx < 1 || my < 1 || nf < 1 || nc < 1 || params.rank < 1) {
    throw Error(ErrorCode::InvalidArgument, "synthetic dimensions must be positive");
  }
  if (!(params.acceleration >= 1.0) || !(params.noise_sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "acceleration must be >= 1 and noise sigma >= 0");
  }
  if (geometry.image_x() != mx || geometry.image_y() != my) {
    throw Error(ErrorCode::DimensionMismatch, "patch geometry does not match the image size");
  }
  if (params.acceleration > nf) {
    throw Error(ErrorCode::InfeasibleMask,
                "acceleration exceeds the frame count; the union of masks cannot cover k-space");
  }
  const Eigen::Index m = Eigen::Index{mx} * my;
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const UnitaryFft2 fft(mx, my);

  // Spatial modes: random low-frequency content, unit RMS.
  const int band = 3;
  CMatrix spatial(m, params.rank);
  for (int j = 0; j < params.rank; ++j) {
    CVector k = CVector::Zero(m);
    for (int y = 0; y < my; ++y) {
      for (int x = 0; x < mx; ++x) {
        if (std::abs(centered(x, mx)) <= band && std::abs(centered(y, my)) <= band) {
          k(x + Eigen::Index{mx} * y) = Complex(gauss(rng), gauss(rng));
        }
      }
    }
    CVector img = fft.inverse(k);
    img *= std::sqrt(static_cast<double>(m)) / img.norm();
    spatial.col(j) = img;
  }
  // Temporal profiles: a few low-frequency harmonics, unit RMS, decaying mode energy.
  CMatrix temporal(nf, params.rank);
  for (int j = 0; j < params.rank; ++j) {
    const Complex offset(gauss(rng), gauss(rng));
    for (int n = 0; n < nf; ++n) temporal(n, j) = j == 0 ? Complex(2.0, 0.0) + 0.3 * offset : offset;
    for (int q = 1; q <= 2; ++q) {
      const Complex amp(gauss(rng), gauss(rng));
      const double phase = 2.0 * std::numbers::pi * uniform(rng);
      for (int n = 0; n < nf; ++n) {
        const double t = static_cast<double>(n) / nf;
        temporal(n, j) += amp * std::cos(2.0 * std::numbers::pi * q * t + phase);
      }
    }
    temporal.col(j) *= std::pow(0.5, j) * std::sqrt(static_cast<double>(nf)) / temporal.col(j).norm();
  }
  const CMatrix truth = spatial * temporal.transpose();

  // Coil maps: Gaussian bumps around the field of view with a linear phase,
  // normalized to unit sum of squares per voxel.
  CMatrix coils(m, nc);
  for (int c = 0; c < nc; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / nc;
    const double cx = 0.7 * std::cos(angle), cy = 0.7 * std::sin(angle);
    const double px = 0.5 * gauss(rng), py = 0.5 * gauss(rng), p0 = 2.0 * std::numbers::pi * uniform(rng);
    for (int y = 0; y < my; ++y) {
      for (int x = 0; x < mx; ++x) {
        const double u = 2.0 * (x + 0.5) / mx - 1.0, v = 2.0 * (y + 0.5) / my - 1.0;
        const double r2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
        const double mag = nc == 1 ? 1.0 : std::exp(-r2 / (2.0 * 0.6 * 0.6));
        coils(x + Eigen::Index{mx} * y, c) = std::polar(mag, p0 + px * u + py * v);
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) coils.row(i) /= coils.row(i).norm();

  // Masks: fully sampled center plus density-weighted random picks.
  MaskMatrix masks = MaskMatrix::Zero(m, nf);
  const int cx_half = std::max(1, mx / 16), cy_half = std::max(1, my / 16);
  const auto budget = static_cast<Eigen::Index>(std::llround(static_cast<double>(m) / params.acceleration));
  std::vector<Eigen::Index> outer;
  std::vector<double> density;
  for (int y = 0; y < my; ++y) {
    for (int x = 0; x < mx; ++x) {
      const int kx = centered(x, mx), ky = centered(y, my);
      const Eigen::Index i = x + Eigen::Index{mx} * y;
      if (std::abs(kx) <= cx_half && std::abs(ky) <= cy_half) {
        masks.row(i).setOnes();
      } else {
        const double rx = 2.0 * kx / mx, ry = 2.0 * ky / my;
        outer.push_back(i);
        density.push_back(1.0 / (1.0 + 16.0 * (rx * rx + ry * ry)));
      }
    }
  }
  const Eigen::Index center_count = m - static_cast<Eigen::Index>(outer.size());
  const auto picks = static_cast<std::size_t>(std::clamp<Eigen::Index>(
      budget - center_count, 0, static_cast<Eigen::Index>(outer.size())));
  for (int n = 0; n < nf; ++n) {
    // Weighted sampling without replacement: keep the largest u^(1/w).
    std::vector<std::pair<double, Eigen::Index>> keys(outer.size());
    for (std::size_t i = 0; i < outer.size(); ++i) {
      keys[i] = {std::pow(uniform(rng), 1.0 / density[i]), outer[i]};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(picks), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < picks; ++i) masks(keys[i].second, n) = 1;
  }
  std::uniform_int_distribution<int> frame_pick(0, nf - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (masks.row(i).cast<int>().sum() == 0) masks(i, frame_pick(rng)) = 1;
  }

  auto op = std::make_shared<MriOperator>(mx, my, coils, masks);
  CMatrix data = op->apply(truth);
  if (params.noise_sigma > 0.0) {
    const double s = params.noise_sigma / std::sqrt(2.0);
    for (Eigen::Index n = 0; n < nf; ++n) {
      for (Eigen::Index c = 0; c < nc; ++c) {
        for (Eigen::Index i = 0; i < m; ++i) {
          if (masks(i, n) != 0) data(c * m + i, n) += Complex(s * gauss(rng), s * gauss(rng));
        }
      }
    }
  }
  return ReconstructionProblem{std::move(op), std::move(data), truth, geometry, std::nullopt, params};
}

CMatrix datashare_init(const MriOperator& op, const CMatrix& y) {
  if (y.rows() != op.output_rows() || y.cols() != op.frames()) {
    throw Error(ErrorCode::DimensionMismatch, "data shape does not match the operator");
  }
  const MaskMatrix& masks = op.masks();
  const Eigen::Index m = op.input_rows(), nf = op.frames();
  CMatrix filled = y;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index n = 0; n < nf; ++n) {
      if (masks(i, n) != 0) continue;
      Eigen::Index source = -1;
      for (Eigen::Index dist = 1; dist < nf && source < 0; ++dist) {
        if (n - dist >= 0 && masks(i, n - dist) != 0) {
          source = n - dist;
        } else if (n + dist < nf && masks(i, n + dist) != 0) {
          source = n + dist;
        }
      }
      if (source < 0) {
        throw Error(ErrorCode::InfeasibleMask,
                    "k-space location " + std::to_string(i) + " is never sampled");
      }
      for (Eigen::Index c = 0; c < op.coil_count(); ++c) filled(c * m + i, n) = y(c * m + i, source);
    }
  }
  return op.adjoint_unmasked(filled);
}

CMatrix datashare_init(const ReconstructionProblem& p) {
  const MriOperator* mri = p.mri();
  if (mri == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "data-sharing initialization needs an MRI operator");
  }
  return datashare_init(*mri, p.data);
}

}  // namespace huberlr
