#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "huberlr/linesearch.hpp"
#include "huberlr/llr.hpp"

namespace huberlr {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Linear map from M x N image series to S x N data.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Eigen::Index input_rows() const = 0;
  virtual Eigen::Index output_rows() const = 0;
  virtual Eigen::Index frames() const = 0;

  virtual CMatrix apply(const CMatrix& x) const = 0;
  virtual CMatrix adjoint(const CMatrix& y) const = 0;
};

class IdentityOperator final : public LinearOperator {
 public:
  IdentityOperator(Eigen::Index rows, Eigen::Index frames) : rows_(rows), frames_(frames) {}

  Eigen::Index input_rows() const override { return rows_; }
  Eigen::Index output_rows() const override { return rows_; }
  Eigen::Index frames() const override { return frames_; }
  CMatrix apply(const CMatrix& x) const override;
  CMatrix adjoint(const CMatrix& y) const override;

 private:
  Eigen::Index rows_, frames_;
};

/// Unitary 2D DFT on mx x my images stored x-fastest. Backed by FFTW plans
/// created once; transforms may run concurrently.
class UnitaryFft2 {
 public:
  UnitaryFft2(int mx, int my);
  ~UnitaryFft2();
  UnitaryFft2(const UnitaryFft2&) = delete;
  UnitaryFft2& operator=(const UnitaryFft2&) = delete;

  CVector forward(const CVector& image) const;
  CVector inverse(const CVector& kspace) const;

 private:
  CVector run(const CVector& in, void* plan) const;

  int mx_, my_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Multi-coil masked Fourier sampling: for frame n and coil c,
/// y_{c,n} = mask_n .* F(coil_c .* x_n). Output rows are coil-major (c * M + k);
/// unsampled entries are zero.
class MriOperator final : public LinearOperator {
 public:
  /// coils: M x C sensitivities; masks: M x N with entries in {0, 1}.
  MriOperator(int mx, int my, CMatrix coils, MaskMatrix masks);

  Eigen::Index input_rows() const override { return voxels_; }
  Eigen::Index output_rows() const override { return voxels_ * coils_.cols(); }
  Eigen::Index frames() const override { return masks_.cols(); }
  CMatrix apply(const CMatrix& x) const override;
  CMatrix adjoint(const CMatrix& y) const override;

  /// Adjoint with every k-space location treated as sampled.
  CMatrix adjoint_unmasked(const CMatrix& y) const;

  int image_x() const noexcept { return mx_; }
  int image_y() const noexcept { return my_; }
  Eigen::Index coil_count() const noexcept { return coils_.cols(); }
  const CMatrix& coils() const noexcept { return coils_; }
  const MaskMatrix& masks() const noexcept { return masks_; }

 private:
  int mx_, my_;
  Eigen::Index voxels_;
  CMatrix coils_;
  MaskMatrix masks_;
  std::shared_ptr<UnitaryFft2> fft_;
};

/// Generator settings recorded alongside a problem.
struct SyntheticParams {
  std::uint64_t seed = 1;
  int image_x = 32;
  int image_y = 32;
  int frames = 8;
  int coils = 4;
  int rank = 3;
  double acceleration = 4.0;
  double noise_sigma = 0.01;
};

struct ReconstructionProblem {
  std::shared_ptr<const LinearOperator> op;
  CMatrix data;
  std::optional<CMatrix> truth;
  PatchGeometry geometry;
  /// Regularization strength; unset means "choose from the initial point".
  std::optional<double> lambda;
  SyntheticParams params;

  const MriOperator* mri() const noexcept { return dynamic_cast<const MriOperator*>(op.get()); }
  void validate() const;
};

/// 1/2 ||A(X) - Y||_F^2.
double f_value(const LinearOperator& op, const CMatrix& y, const CMatrix& x);
/// A^*(A(X) - Y).
CMatrix f_grad(const LinearOperator& op, const CMatrix& y, const CMatrix& x);
/// Exact quadratic of a -> f(X + a D) expanded at abar.
LineQuadratic f_line_coeffs(const LinearOperator& op, const CMatrix& y, const CMatrix& x,
                            const CMatrix& d, double abar);

inline double f_value(const ReconstructionProblem& p, const CMatrix& x) {
  return f_value(*p.op, p.data, x);
}
inline CMatrix f_grad(const ReconstructionProblem& p, const CMatrix& x) {
  return f_grad(*p.op, p.data, x);
}
inline LineQuadratic f_line_coeffs(const ReconstructionProblem& p, const CMatrix& x,
                                   const CMatrix& d, double abar) {
  return f_line_coeffs(*p.op, p.data, x, d, abar);
}

/// Globally rank-r ground truth, smooth normalized coil maps, variable-density
/// masks with a fully sampled center whose union covers k-space, and complex
/// white noise on the sampled entries. Deterministic given params.seed.
/// Throws InfeasibleMask when acceleration > frames.
ReconstructionProblem generate_synthetic(const SyntheticParams& params,
                                         const PatchGeometry& geometry);

/// Fill each unsampled k-space entry from the nearest frame that sampled it
/// (earlier frame on ties), then coil-combine with the unmasked adjoint.
CMatrix datashare_init(const MriOperator& op, const CMatrix& y);
CMatrix datashare_init(const ReconstructionProblem& p);

}  // namespace huberlr
