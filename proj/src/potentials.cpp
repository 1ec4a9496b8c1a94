#include "huberlr/potentials.hpp"

#include <cmath>
#include <string>

#include "huberlr/common.hpp"

namespace huberlr {

namespace {

void check_delta(double delta, const char* kind) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(kind) + " potential requires delta > 0, got " + std::to_string(delta));
  }
}

}  // namespace

Potential Potential::hyperbola(double delta) {
  check_delta(delta, "hyperbola");
  return Potential(PotentialKind::Hyperbola, delta);
}

Potential Potential::cauchy(double delta) {
  check_delta(delta, "cauchy");
  return Potential(PotentialKind::Cauchy, delta);
}

Potential Potential::parabola() { return Potential(PotentialKind::Parabola, 1.0); }

Potential Potential::from_name(std::string_view name, double delta) {
  if (name == "hyperbola") return hyperbola(delta);
  if (name == "cauchy") return cauchy(delta);
  if (name == "parabola") return parabola();
  throw Error(ErrorCode::InvalidArgument, "unknown potential '" + std::string(name) + "'");
}

std::string Potential::name() const {
  switch (kind_) {
    case PotentialKind::Hyperbola: return "hyperbola";
    case PotentialKind::Cauchy: return "cauchy";
    case PotentialKind::Parabola: return "parabola";
  }
  return "unknown";
}

double Potential::value(double t) const noexcept {
  switch (kind_) {
    case PotentialKind::Hyperbola: {
      const double u = t / delta_;
      return delta_ * delta_ * std::sqrt(1.0 + u * u);
    }
    case PotentialKind::Cauchy: {
      const double u = t / delta_;
      return 0.5 * delta_ * delta_ * std::log1p(u * u);
    }
    case PotentialKind::Parabola: return t * t;
  }
  return 0.0;
}

double Potential::deriv(double t) const noexcept {
  switch (kind_) {
    case PotentialKind::Hyperbola: {
      const double u = t / delta_;
      return t / std::sqrt(1.0 + u * u);
    }
    case PotentialKind::Cauchy: {
      const double u = t / delta_;
      return t / (1.0 + u * u);
    }
    case PotentialKind::Parabola: return 2.0 * t;
  }
  return 0.0;
}

double Potential::weight(double t) const noexcept {
  if (kind_ == PotentialKind::Parabola) return 2.0;
  // w is flat near zero for both nonquadratic potentials.
  if (std::abs(t) < 1e-3 * delta_) return weight_at_zero();
  const double u = t / delta_;
  if (kind_ == PotentialKind::Hyperbola) return 1.0 / std::sqrt(1.0 + u * u);
  return 1.0 / (1.0 + u * u);
}

double Potential::weight_at_zero() const noexcept {
  return kind_ == PotentialKind::Parabola ? 2.0 : 1.0;
}

QuadCoeffs1D quad_majorizer_1d(const Potential& p, double s) noexcept {
  return {p.value(s), p.deriv(s), p.weight(s), s};
}

}  // namespace huberlr
