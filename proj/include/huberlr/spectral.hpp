#pragma once

#include <optional>

#include "huberlr/common.hpp"
#include "huberlr/potentials.hpp"

namespace huberlr {

/// X = U diag(sigma) V^H with sigma nonincreasing.
struct SvdFactors {
  CMatrix U;
  RVector sigma;
  CMatrix V;
};

/// Full SVD: U is M x M, V is N x N. Throws ConvergenceFailure on a
/// non-finite result.
SvdFactors svd(const CMatrix& x);
/// Thin SVD: U is M x r, V is N x r, r = min(M, N).
SvdFactors thin_svd(const CMatrix& x);
/// Singular values only, nonincreasing.
RVector singular_values(const CMatrix& x);

/// Curvature operators for the quadratic majorizers: GR depends on the
/// singular values of the expansion point, GL is the constant w(0) bound.
enum class Curvature { GR, GL };

Curvature curvature_from_name(std::string_view name);
const char* to_string(Curvature c);

/// R(X) = sum_k w_k phi(sigma_k(X)). Weights are absent (all ones) for the
/// plain regularizer; tail weights zero the first K entries.
///
/// Weights are validated here (finite, nonnegative, not all zero). Ordering
/// hypotheses are checked by the operations that rely on them.
class SpectralRegularizer {
 public:
  static SpectralRegularizer plain(Potential potential);
  static SpectralRegularizer weighted(Potential potential, RVector weights);
  static SpectralRegularizer tail(Potential potential, Eigen::Index r, Eigen::Index k);

  const Potential& potential() const noexcept { return potential_; }
  const std::optional<RVector>& weights() const noexcept { return weights_; }
  bool is_weighted() const noexcept { return weights_.has_value(); }

  /// Weight vector for matrices with r = min(M, N); throws DimensionMismatch.
  RVector weights_for(Eigen::Index r) const;
  double max_weight() const noexcept;
  bool weights_nondecreasing() const noexcept;
  bool weights_nonincreasing() const noexcept;

  /// Same potential, weights dropped.
  SpectralRegularizer unweighted() const { return plain(potential_); }

 private:
  SpectralRegularizer(Potential potential, std::optional<RVector> weights)
      : potential_(potential), weights_(std::move(weights)) {}

  Potential potential_;
  std::optional<RVector> weights_;
};

/// w_k = 0 for k <= K and 1 otherwise (1-based k); K in [0, r-1].
RVector tail_weights(Eigen::Index r, Eigen::Index k);

double reg_value(const SpectralRegularizer& reg, const CMatrix& x);

/// U diag(w .* phi'(sigma)) V^H. For weighted regularizers this is the
/// gradient only when the singular values of x are distinct; the factors the
/// SVD backend returns are used as-is.
CMatrix reg_grad(const SpectralRegularizer& reg, const CMatrix& x);

/// Convex iff the potential is convex and the weights are nonincreasing.
bool is_convex(const SpectralRegularizer& reg);

/// ||w||_inf * w(0).
double lipschitz_bound(const SpectralRegularizer& reg);

/// M x N curvature matrix G(sigma(S)) for the majorizer expanded at the point
/// whose factors are given. Square matrices use the wide form. Weighted
/// regularizers require nondecreasing weights (WeightsNotNondecreasing).
RMatrix curvature_matrix(const SpectralRegularizer& reg, const SvdFactors& factors,
                         Curvature mode);

/// Q(X; S, G) = R(S) + Re<grad R(S), X - S> + 1/2 sum(G .* |U^H (X - S) V|^2),
/// computed from the full SVD of S.
double majorizer_value(const SpectralRegularizer& reg, const CMatrix& x, const CMatrix& s,
                       Curvature mode);

/// The regularizer evaluated at one point from a single thin SVD. Provides
/// the value, gradient, directional derivative and majorizer curvature along
/// a direction without refactorizing.
///
/// The curvature uses the Frobenius forms of the majorizer: only the factor on
/// the short side is needed because the other one is unitary.
class SpectralPoint {
 public:
  SpectralPoint(const SpectralRegularizer& reg, const CMatrix& x);

  double value() const noexcept { return value_; }
  CMatrix gradient() const;
  /// Re<grad R(X), D>.
  double directional(const CMatrix& d) const;
  /// sum(G .* |U^H D V|^2).
  double curvature(const CMatrix& d, Curvature mode) const;

  const SvdFactors& factors() const noexcept { return factors_; }

 private:
  void check_direction(const CMatrix& d) const;

  Potential potential_;
  bool weighted_ = false;
  bool nondecreasing_ = true;
  SvdFactors factors_;
  RVector weights_;
  RVector grad_coeffs_;  // w .* phi'(sigma)
  double value_ = 0.0;
  bool wide_ = true;
};

}  // namespace huberlr
