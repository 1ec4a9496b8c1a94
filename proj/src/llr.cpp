#include "huberlr/llr.hpp"

#include <string>

namespace huberlr {

namespace {

int wrap(int v, int n) {
  const int r = v % n;
  return r < 0 ? r + n : r;
}

CMatrix gather(const CMatrix& x, const std::vector<Eigen::Index>& rows) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

void scatter_add(CMatrix& out, const std::vector<Eigen::Index>& rows, const CMatrix& c) {
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) += c.row(static_cast<Eigen::Index>(i));
}

void check_rows(const CMatrix& x, const PatchGeometry& geom, const char* where) {
  if (x.rows() != geom.voxels()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": matrix has " +
                                                  std::to_string(x.rows()) + " rows, grid has " +
                                                  std::to_string(geom.voxels()) + " voxels");
  }
}

struct TermCoeffs {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

// Per-term coefficients for the listed shift indices, stored in (s, p) order.
std::vector<TermCoeffs> term_coeffs(const SpectralRegularizer& reg, const CMatrix& x,
                                    const CMatrix& d, double abar, const PatchGeometry& geom,
                                    Curvature mode, const std::vector<std::size_t>& shift_ids) {
  check_rows(x, geom, "llr_line_coeffs");
  require_same_shape(x, d, "llr_line_coeffs");
  const std::size_t np = geom.locations().size();
  std::vector<TermCoeffs> out(shift_ids.size() * np);
  const CMatrix xa = x + abar * d;
  parallel_for(out.size(), [&](std::size_t t) {
    const auto& rows = geom.rows(shift_ids[t / np], t % np);
    const CMatrix dp = gather(d, rows);
    const SpectralPoint point(reg, gather(xa, rows));
    out[t] = {point.value(), point.directional(dp), point.curvature(dp, mode)};
  });
  return out;
}

LineQuadratic sum_terms(const std::vector<TermCoeffs>& terms, double abar, double scale,
                        Reduction reduction) {
  std::vector<double> c0(terms.size()), c1(terms.size()), c2(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    c0[i] = terms[i].c0;
    c1[i] = terms[i].c1;
    c2[i] = terms[i].c2;
  }
  return {scale * reduce_sum(c0, reduction), scale * reduce_sum(c1, reduction),
          scale * reduce_sum(c2, reduction), abar};
}

}  // namespace

PatchGeometry::PatchGeometry(int mx, int my, int nx, int ny) : PatchGeometry(mx, my, nx, ny, true) {}

PatchGeometry PatchGeometry::unshifted(int mx, int my, int nx, int ny) {
  return PatchGeometry(mx, my, nx, ny, false);
}

PatchGeometry::PatchGeometry(int mx, int my, int nx, int ny, bool shifted)
    : mx_(mx), my_(my), nx_(nx), ny_(ny) {
  const std::string dims = std::to_string(mx) + "x" + std::to_string(my) + " image, " +
                           std::to_string(nx) + "x" + std::to_string(ny) + " patch";
  if (mx < 1 || my < 1 || nx < 1 || ny < 1) {
    throw Error(ErrorCode::InvalidGeometry, "dimensions must be positive (" + dims + ")");
  }
  if (mx % nx != 0 || my % ny != 0) {
    throw Error(ErrorCode::InvalidGeometry, "patch dimensions must divide the image (" + dims + ")");
  }
  if (shifted && (nx % 2 != 0 || ny % 2 != 0)) {
    throw Error(ErrorCode::InvalidGeometry, "shifted tilings need even patch dimensions (" + dims + ")");
  }

  for (int y = 0; y < my; y += ny) {
    for (int x = 0; x < mx; x += nx) locations_.push_back({x, y});
  }
  if (shifted) {
    for (int sx = -nx / 2 + 1; sx <= nx / 2; ++sx) {
      for (int sy = -ny / 2 + 1; sy <= ny / 2; ++sy) shifts_.push_back({sx, sy});
    }
  } else {
    shifts_.push_back({0, 0});
  }

  gather_.reserve(term_count());
  for (const Shift& s : shifts_) {
    for (const Location& p : locations_) gather_.push_back(make_rows(s, p));
  }
}

std::vector<Eigen::Index> PatchGeometry::make_rows(Shift s, Location p) const {
  // S_s(X)(x, y) = X(x - s_x, y - s_y), wrapped.
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(patch_voxels()));
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      rows.push_back(voxel(wrap(p.x + i - s.x, mx_), wrap(p.y + j - s.y, my_)));
    }
  }
  return rows;
}

bool PatchGeometry::contains(Location p) const noexcept {
  return p.x >= 0 && p.y >= 0 && p.x < mx_ && p.y < my_ && p.x % nx_ == 0 && p.y % ny_ == 0;
}

std::size_t PatchGeometry::location_index(Location p) const {
  if (!contains(p)) {
    throw Error(ErrorCode::LocationOutOfGrid,
                "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is not a patch anchor");
  }
  return static_cast<std::size_t>((p.y / ny_) * (mx_ / nx_) + p.x / nx_);
}

std::size_t PatchGeometry::shift_index(Shift s) const {
  for (std::size_t i = 0; i < shifts_.size(); ++i) {
    if (shifts_[i] == s) return i;
  }
  throw Error(ErrorCode::InvalidArgument,
              "shift (" + std::to_string(s.x) + ", " + std::to_string(s.y) + ") is not in the shift set");
}

CMatrix extract_patch(const CMatrix& x, Location p, const PatchGeometry& geom) {
  check_rows(x, geom, "extract_patch");
  const std::size_t idx = geom.location_index(p);
  return gather(x, geom.rows(geom.shift_index({0, 0}), idx));
}

CMatrix adjoint_patch(const CMatrix& c, Location p, const PatchGeometry& geom) {
  const std::size_t idx = geom.location_index(p);
  if (c.rows() != geom.patch_voxels()) {
    throw Error(ErrorCode::DimensionMismatch, "adjoint_patch: Casorati matrix has " +
                                                  std::to_string(c.rows()) + " rows, patch has " +
                                                  std::to_string(geom.patch_voxels()));
  }
  CMatrix out = CMatrix::Zero(geom.voxels(), c.cols());
  scatter_add(out, geom.rows(geom.shift_index({0, 0}), idx), c);
  return out;
}

CMatrix shift(const CMatrix& x, Shift s, const PatchGeometry& geom) {
  check_rows(x, geom, "shift");
  CMatrix out(x.rows(), x.cols());
  for (int y = 0; y < geom.image_y(); ++y) {
    for (int xx = 0; xx < geom.image_x(); ++xx) {
      out.row(geom.voxel(xx, y)) =
          x.row(geom.voxel(wrap(xx - s.x, geom.image_x()), wrap(y - s.y, geom.image_y())));
    }
  }
  return out;
}

double llr_value(const SpectralRegularizer& reg, const CMatrix& x, const PatchGeometry& geom,
                 const LlrOptions& opts) {
  check_rows(x, geom, "llr_value");
  const std::size_t np = geom.locations().size();
  std::vector<double> terms(geom.term_count());
  parallel_for(terms.size(), [&](std::size_t t) {
    terms[t] = reg_value(reg, gather(x, geom.rows(t / np, t % np)));
  });
  return reduce_sum(terms, opts.reduction);
}

LlrValueGrad llr_value_grad(const SpectralRegularizer& reg, const CMatrix& x,
                            const PatchGeometry& geom, const LlrOptions& opts) {
  check_rows(x, geom, "llr_grad");
  const std::size_t np = geom.locations().size();
  std::vector<double> values(geom.term_count());
  LlrValueGrad out{0.0, CMatrix::Zero(x.rows(), x.cols())};
  // Patches of one shift are disjoint, so their scatters never collide and the
  // accumulation order per voxel is fixed by the shift loop.
  for (std::size_t s = 0; s < geom.shifts().size(); ++s) {
    parallel_for(np, [&](std::size_t p) {
      const auto& rows = geom.rows(s, p);
      const SpectralPoint point(reg, gather(x, rows));
      values[s * np + p] = point.value();
      scatter_add(out.gradient, rows, point.gradient());
    });
  }
  out.value = reduce_sum(values, opts.reduction);
  return out;
}

CMatrix llr_grad(const SpectralRegularizer& reg, const CMatrix& x, const PatchGeometry& geom,
                 const LlrOptions& opts) {
  return llr_value_grad(reg, x, geom, opts).gradient;
}

LineQuadratic llr_line_coeffs(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& d,
                              double abar, const PatchGeometry& geom, Curvature mode,
                              const LlrOptions& opts) {
  std::vector<std::size_t> all(geom.shifts().size());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  return sum_terms(term_coeffs(reg, x, d, abar, geom, mode, all), abar, 1.0, opts.reduction);
}

LineQuadratic llr_line_coeffs_fast(const SpectralRegularizer& reg, const CMatrix& x,
                                   const CMatrix& d, double abar, const PatchGeometry& geom,
                                   Curvature mode, Shift sbar, const LlrOptions& opts) {
  const std::vector<std::size_t> one{geom.shift_index(sbar)};
  const auto scale = static_cast<double>(geom.shifts().size());
  return sum_terms(term_coeffs(reg, x, d, abar, geom, mode, one), abar, scale, opts.reduction);
}

}  // namespace huberlr
