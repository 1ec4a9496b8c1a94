#pragma once

#include <string>
#include <string_view>

namespace huberlr {

enum class PotentialKind { Hyperbola, Cauchy, Parabola };

/// An even scalar potential satisfying the Huber conditions: differentiable,
/// with a weighting function w(t) = phi'(t)/t that is bounded, nonnegative and
/// nonincreasing for t > 0.
///
///   hyperbola  phi(t) = d^2 sqrt(1 + (t/d)^2)      (convex)
///   cauchy     phi(t) = d^2/2 log(1 + (t/d)^2)     (non-convex)
///   parabola   phi(t) = t^2                        (delta unused)
class Potential {
 public:
  static Potential hyperbola(double delta);
  static Potential cauchy(double delta);
  static Potential parabola();
  /// Accepts "hyperbola", "cauchy" or "parabola".
  static Potential from_name(std::string_view name, double delta);

  PotentialKind kind() const noexcept { return kind_; }
  double delta() const noexcept { return delta_; }
  std::string name() const;

  double value(double t) const noexcept;
  double deriv(double t) const noexcept;
  /// phi'(t)/t, with the analytic limit used at and near t = 0.
  double weight(double t) const noexcept;
  /// w(0): the Lipschitz constant of phi'.
  double weight_at_zero() const noexcept;
  bool is_convex() const noexcept { return kind_ != PotentialKind::Cauchy; }

  friend bool operator==(const Potential&, const Potential&) = default;

 private:
  Potential(PotentialKind kind, double delta) : kind_(kind), delta_(delta) {}

  PotentialKind kind_;
  double delta_;
};

/// q(t; s) = c0 + c1 (t - s) + c2/2 (t - s)^2.
struct QuadCoeffs1D {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double center = 0.0;

  double operator()(double t) const noexcept {
    const double d = t - center;
    return c0 + c1 * d + 0.5 * c2 * d * d;
  }
};

/// Optimal quadratic majorizer of phi at s; curvature is w(s).
QuadCoeffs1D quad_majorizer_1d(const Potential& p, double s) noexcept;

}  // namespace huberlr
