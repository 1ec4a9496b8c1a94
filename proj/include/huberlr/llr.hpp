#pragma once

#include <compare>
#include <vector>

#include "huberlr/linesearch.hpp"
#include "huberlr/parallel.hpp"
#include "huberlr/spectral.hpp"

namespace huberlr {

/// Patch anchor (top-left voxel) on the image grid.
struct Location {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Location&, const Location&) = default;
};

/// Circular shift; positive x moves voxels towards larger x.
struct Shift {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Shift&, const Shift&) = default;
  Shift operator-() const { return {-x, -y}; }
};

/// Image and patch dimensions with the non-overlapping tiling Gamma and the
/// shift set Lambda. Columns of the M x N data matrices are images of size
/// image_x() x image_y() vectorized with x fastest (index = x + image_x * y).
///
/// Both orderings are row-major: Gamma over (y, x) anchors, Lambda over
/// (s_x, s_y) in [-n/2 + 1, n/2].
class PatchGeometry {
 public:
  /// Even patch dimensions dividing the image dimensions; |Lambda| = nx * ny.
  PatchGeometry(int mx, int my, int nx, int ny);

  /// Same tiling with Lambda = {0}; patch dimensions need not be even.
  static PatchGeometry unshifted(int mx, int my, int nx, int ny);
  /// One patch covering the whole image, Lambda = {0}.
  static PatchGeometry global(int mx, int my) { return unshifted(mx, my, mx, my); }

  int image_x() const noexcept { return mx_; }
  int image_y() const noexcept { return my_; }
  int patch_x() const noexcept { return nx_; }
  int patch_y() const noexcept { return ny_; }
  Eigen::Index voxels() const noexcept { return Eigen::Index{mx_} * my_; }
  Eigen::Index patch_voxels() const noexcept { return Eigen::Index{nx_} * ny_; }

  const std::vector<Location>& locations() const noexcept { return locations_; }
  const std::vector<Shift>& shifts() const noexcept { return shifts_; }
  std::size_t term_count() const noexcept { return locations_.size() * shifts_.size(); }

  bool contains(Location p) const noexcept;
  std::size_t location_index(Location p) const;  // throws LocationOutOfGrid
  std::size_t shift_index(Shift s) const;        // throws InvalidArgument

  /// Source voxel rows of P_p(S_s(X)) for shift index `s` and location index `p`.
  const std::vector<Eigen::Index>& rows(std::size_t s, std::size_t p) const {
    return gather_[s * locations_.size() + p];
  }

  Eigen::Index voxel(int x, int y) const noexcept { return Eigen::Index{x} + Eigen::Index{mx_} * y; }

 private:
  PatchGeometry(int mx, int my, int nx, int ny, bool shifted);
  std::vector<Eigen::Index> make_rows(Shift s, Location p) const;

  int mx_, my_, nx_, ny_;
  std::vector<Location> locations_;
  std::vector<Shift> shifts_;
  std::vector<std::vector<Eigen::Index>> gather_;
};

/// Casorati matrix of patch p: P x N, column n is the patch of frame n.
CMatrix extract_patch(const CMatrix& x, Location p, const PatchGeometry& geom);
/// Zero M x N matrix with the patch rows of p filled from c.
CMatrix adjoint_patch(const CMatrix& c, Location p, const PatchGeometry& geom);
/// Circular shift of every frame by s; the adjoint is shift by -s.
CMatrix shift(const CMatrix& x, Shift s, const PatchGeometry& geom);

struct LlrOptions {
  Reduction reduction = Reduction::Sequential;
};

/// sum over (s, p) of R(P_p(S_s(X))).
double llr_value(const SpectralRegularizer& reg, const CMatrix& x, const PatchGeometry& geom,
                 const LlrOptions& opts = {});

/// sum over (s, p) of S_s^*(P_p^*(grad R(P_p(S_s(X))))).
CMatrix llr_grad(const SpectralRegularizer& reg, const CMatrix& x, const PatchGeometry& geom,
                 const LlrOptions& opts = {});

struct LlrValueGrad {
  double value = 0.0;
  CMatrix gradient;
};

/// Value and gradient from one SVD per term.
LlrValueGrad llr_value_grad(const SpectralRegularizer& reg, const CMatrix& x,
                            const PatchGeometry& geom, const LlrOptions& opts = {});

/// Majorizer of a -> llr_value(X + a D) at abar: per-term coefficients summed
/// over Gamma x Lambda.
LineQuadratic llr_line_coeffs(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& d,
                              double abar, const PatchGeometry& geom, Curvature mode,
                              const LlrOptions& opts = {});

/// Single-shift approximation: |Lambda| times the terms of shift sbar only.
/// Not guaranteed to majorize.
LineQuadratic llr_line_coeffs_fast(const SpectralRegularizer& reg, const CMatrix& x,
                                   const CMatrix& d, double abar, const PatchGeometry& geom,
                                   Curvature mode, Shift sbar = {},
                                   const LlrOptions& opts = {});

}  // namespace huberlr
