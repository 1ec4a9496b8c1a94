#include "huberlr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace huberlr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

double truth_error(const ReconstructionProblem& p, const CMatrix& x) {
  return p.truth ? nrmse(x, *p.truth) : std::numeric_limits<double>::quiet_NaN();
}

void check_start(const ReconstructionProblem& p, const CMatrix& x0) {
  p.validate();
  if (x0.rows() != p.op->input_rows() || x0.cols() != p.op->frames()) {
    throw Error(ErrorCode::DimensionMismatch, "initial estimate shape does not match the problem");
  }
}

void keep_iterate(SolveResult& r, const SolverConfig& cfg, int iter, const CMatrix& x, bool last) {
  if (cfg.store_every <= 0) return;
  if (iter % cfg.store_every == 0 || last) {
    if (r.iterates.empty() || r.iterates.back().first != iter) r.iterates.emplace_back(iter, x);
  }
}

struct CostGrad {
  double cost = 0.0;
  CMatrix grad;
};

CostGrad composite(const ReconstructionProblem& p, const SpectralRegularizer& reg,
                   const SolverConfig& cfg, const CMatrix& x) {
  const CMatrix residual = p.op->apply(x) - p.data;
  CostGrad out{0.5 * residual.squaredNorm(), p.op->adjoint(residual)};
  if (cfg.lambda > 0.0) {
    const LlrValueGrad r = llr_value_grad(reg, x, p.geometry, cfg.llr_options());
    out.cost += cfg.lambda * r.value;
    out.grad += cfg.lambda * r.gradient;
  }
  if (!std::isfinite(out.cost) || !out.grad.allFinite()) {
    throw Error(ErrorCode::NonFinite, "cost or gradient is not finite");
  }
  return out;
}

double baseline_cost(const ReconstructionProblem& p, const SolverConfig& cfg, const CMatrix& x) {
  double c = f_value(p, x);
  if (cfg.lambda > 0.0) c += cfg.lambda * llr_nuclear(x, p.geometry);
  return c;
}

}  // namespace

Method method_from_name(std::string_view name) {
  if (name == "ncg") return Method::NCG;
  if (name == "fista" || name == "fista_pa") return Method::FISTA_PA;
  if (name == "pogm" || name == "pogm_pa") return Method::POGM_PA;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::NCG: return "ncg";
    case Method::FISTA_PA: return "fista_pa";
    case Method::POGM_PA: return "pogm_pa";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(grad_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gradient threshold must be >= 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (n_alpha < 1) throw Error(ErrorCode::InvalidArgument, "n_alpha must be >= 1");
  if (!std::isfinite(alpha0)) throw Error(ErrorCode::InvalidArgument, "alpha0 must be finite");
}

double fletcher_reeves_beta(const CMatrix& g_new, const CMatrix& g_old) {
  return g_new.squaredNorm() / g_old.squaredNorm();
}

SolveResult ncg_solve(const ReconstructionProblem& problem, const SpectralRegularizer& reg,
                      const SolverConfig& cfg, const CMatrix& x0) {
  if (cfg.method != Method::NCG) throw Error(ErrorCode::InvalidArgument, "config method is not ncg");
  cfg.validate();
  check_start(problem, x0);
  const LlrOptions llr_opts = cfg.llr_options();
  const auto start = Clock::now();

  SolveResult result;
  result.x = x0;
  CostGrad current = composite(problem, reg, cfg, result.x);
  double gnorm = current.grad.norm();
  result.log.push_back({0, current.cost, 0.0, gnorm, truth_error(problem, result.x), elapsed(start)});
  keep_iterate(result, cfg, 0, result.x, false);

  CMatrix direction = -current.grad;
  if (gnorm < cfg.grad_tol) result.converged = true;

  for (int k = 0; k < cfg.max_iter && !result.converged; ++k) {
    const CMatrix& x = result.x;
    const CoeffProvider coeffs = [&](double abar) {
      const LineQuadratic qf = f_line_coeffs(problem, x, direction, abar);
      if (cfg.lambda == 0.0) return qf;
      const LineQuadratic qr =
          cfg.fast_step
              ? llr_line_coeffs_fast(reg, x, direction, abar, problem.geometry, cfg.curvature,
                                     cfg.sbar, llr_opts)
              : llr_line_coeffs(reg, x, direction, abar, problem.geometry, cfg.curvature, llr_opts);
      return combine_line_coeffs(qf, qr, cfg.lambda);
    };
    const double alpha = mm_step(coeffs, cfg.alpha0, cfg.n_alpha);
    result.x += alpha * direction;

    CostGrad next = composite(problem, reg, cfg, result.x);
    const double beta = fletcher_reeves_beta(next.grad, current.grad);
    direction = -next.grad + beta * direction;
    if (real_inner(-next.grad, direction) <= 0.0) {
      direction = -next.grad;
      ++result.direction_resets;
    }
    const bool increased = next.cost > current.cost;
    current = std::move(next);
    gnorm = current.grad.norm();
    result.converged = gnorm < cfg.grad_tol;

    result.log.push_back({k + 1, current.cost, alpha, gnorm, truth_error(problem, result.x),
                          elapsed(start), increased});
    keep_iterate(result, cfg, k + 1, result.x, result.converged || k + 1 == cfg.max_iter);
  }
  return result;
}

CMatrix svt(const CMatrix& c, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 0");
  const SvdFactors f = thin_svd(c);
  const RVector shrunk = (f.sigma.array() - tau).max(0.0).matrix();
  return f.U * shrunk.asDiagonal() * f.V.adjoint();
}

CMatrix prox_average_llr(const CMatrix& x, const PatchGeometry& geom, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 0");
  if (x.rows() != geom.voxels()) {
    throw Error(ErrorCode::DimensionMismatch, "prox_average_llr: matrix does not match the grid");
  }
  if (tau == 0.0) return x;
  const std::size_t np = geom.locations().size();
  CMatrix correction = CMatrix::Zero(x.rows(), x.cols());
  for (std::size_t s = 0; s < geom.shifts().size(); ++s) {
    parallel_for(np, [&](std::size_t p) {
      const auto& rows = geom.rows(s, p);
      CMatrix patch(static_cast<Eigen::Index>(rows.size()), x.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) patch.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
      const CMatrix delta = svt(patch, tau) - patch;
      for (std::size_t i = 0; i < rows.size(); ++i) correction.row(rows[i]) += delta.row(static_cast<Eigen::Index>(i));
    });
  }
  return x + correction / static_cast<double>(geom.shifts().size());
}

double llr_nuclear(const CMatrix& x, const PatchGeometry& geom) {
  if (x.rows() != geom.voxels()) {
    throw Error(ErrorCode::DimensionMismatch, "llr_nuclear: matrix does not match the grid");
  }
  const std::size_t np = geom.locations().size();
  std::vector<double> terms(geom.term_count());
  parallel_for(terms.size(), [&](std::size_t t) {
    const auto& rows = geom.rows(t / np, t % np);
    CMatrix patch(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) patch.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    terms[t] = singular_values(patch).sum();
  });
  return reduce_sum(terms, Reduction::Sequential);
}

// Power iteration approaches ||A||^2 from below; the baselines step with a slightly larger constant.
constexpr double kLipschitzMargin = 1.02;

double estimate_lipschitz(const LinearOperator& op, int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix v(op.input_rows(), op.frames());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v /= v.norm();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const CMatrix w = op.adjoint(op.apply(v));
    estimate = w.norm();
    if (estimate == 0.0) return 0.0;
    v = w / estimate;
  }
  return estimate;
}

SolveResult fista_pa_solve(const ReconstructionProblem& problem, const SolverConfig& cfg,
                           const CMatrix& x0) {
  if (cfg.method != Method::FISTA_PA) throw Error(ErrorCode::InvalidArgument, "config method is not fista_pa");
  cfg.validate();
  check_start(problem, x0);
  const double lip = kLipschitzMargin * estimate_lipschitz(*problem.op);
  if (!(lip > 0.0)) throw Error(ErrorCode::NonFinite, "forward operator norm estimate is zero");
  const double step = 1.0 / lip;

  auto start = Clock::now();
  double paused = 0.0;
  SolveResult result;
  result.x = x0;
  CMatrix y = x0;
  double t = 1.0;
  result.log.push_back({0, baseline_cost(problem, cfg, x0), step, f_grad(problem, x0).norm(),
                        truth_error(problem, x0), 0.0});
  keep_iterate(result, cfg, 0, x0, false);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const CMatrix grad = f_grad(problem, y);
    const CMatrix x_next = prox_average_llr(y - step * grad, problem.geometry, cfg.lambda * step);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mapping = (y - x_next).norm() / step;
    y = x_next + ((t - 1.0) / t_next) * (x_next - result.x);
    result.x = x_next;
    t = t_next;
    if (!result.x.allFinite()) throw Error(ErrorCode::NonFinite, "FISTA iterate is not finite");

    const double seconds = elapsed(start) - paused;
    const auto pause = Clock::now();
    const double cost = baseline_cost(problem, cfg, result.x);
    result.log.push_back({k, cost, step, mapping, truth_error(problem, result.x), seconds,
                          cost > result.log.back().cost});
    keep_iterate(result, cfg, k, result.x, k == cfg.max_iter);
    paused += elapsed(pause);
    if (mapping < cfg.grad_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SolveResult pogm_pa_solve(const ReconstructionProblem& problem, const SolverConfig& cfg,
                          const CMatrix& x0) {
  if (cfg.method != Method::POGM_PA) throw Error(ErrorCode::InvalidArgument, "config method is not pogm_pa");
  cfg.validate();
  check_start(problem, x0);
  const double lip = kLipschitzMargin * estimate_lipschitz(*problem.op);
  if (!(lip > 0.0)) throw Error(ErrorCode::NonFinite, "forward operator norm estimate is zero");

  auto start = Clock::now();
  double paused = 0.0;
  SolveResult result;
  result.x = x0;
  CMatrix w_old = x0, z_old = x0;
  double theta_old = 1.0, gamma_old = 1.0 / lip;
  result.log.push_back({0, baseline_cost(problem, cfg, x0), gamma_old, f_grad(problem, x0).norm(),
                        truth_error(problem, x0), 0.0});
  keep_iterate(result, cfg, 0, x0, false);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const CMatrix& x_old = result.x;
    const CMatrix w = x_old - f_grad(problem, x_old) / lip;
    const double theta = k < cfg.max_iter ? 0.5 * (1.0 + std::sqrt(4.0 * theta_old * theta_old + 1.0))
                                          : 0.5 * (1.0 + std::sqrt(8.0 * theta_old * theta_old + 1.0));
    const double gamma = (2.0 * theta_old + theta - 1.0) / (lip * theta);
    const CMatrix z = w + ((theta_old - 1.0) / theta) * (w - w_old) + (theta_old / theta) * (w - x_old) +
                      ((theta_old - 1.0) / (lip * gamma_old * theta)) * (z_old - x_old);
    CMatrix x_next = prox_average_llr(z, problem.geometry, cfg.lambda * gamma);
    const double mapping = (x_old - x_next).norm() / gamma;
    w_old = w;
    z_old = z;
    theta_old = theta;
    gamma_old = gamma;
    result.x = std::move(x_next);
    if (!result.x.allFinite()) throw Error(ErrorCode::NonFinite, "POGM iterate is not finite");

    const double seconds = elapsed(start) - paused;
    const auto pause = Clock::now();
    const double cost = baseline_cost(problem, cfg, result.x);
    result.log.push_back({k, cost, gamma, mapping, truth_error(problem, result.x), seconds,
                          cost > result.log.back().cost});
    keep_iterate(result, cfg, k, result.x, k == cfg.max_iter);
    paused += elapsed(pause);
    if (mapping < cfg.grad_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double nrmse(const CMatrix& x, const CMatrix& ref) {
  require_same_shape(x, ref, "nrmse");
  const double n = ref.norm();
  if (n == 0.0) throw Error(ErrorCode::ZeroReference, "nrmse reference is zero");
  return (x - ref).norm() / n;
}

double dist_to_limit(const CMatrix& xk, const CMatrix& x_inf) {
  require_same_shape(xk, x_inf, "dist_to_limit");
  const double n = x_inf.squaredNorm();
  if (n == 0.0) throw Error(ErrorCode::ZeroReference, "limit point is zero");
  return (xk - x_inf).squaredNorm() / n;
}

double default_lambda(const ReconstructionProblem& problem, const SpectralRegularizer& reg,
                      const CMatrix& x0, double ratio) {
  const double data_grad = f_grad(problem, x0).norm();
  const double reg_grad_norm = llr_grad(reg.unweighted(), x0, problem.geometry).norm();
  if (reg_grad_norm == 0.0) return 0.0;
  return ratio * data_grad / reg_grad_norm;
}

double nuclear_equivalent_lambda(const Potential& potential, double lambda) {
  return potential.kind() == PotentialKind::Hyperbola ? lambda * potential.delta() : lambda;
}

std::string log_csv(const std::vector<IterationRecord>& log) {
  std::ostringstream out;
  out << "iter,cost,alpha,gradnorm,nrmse,seconds\n" << std::setprecision(17);
  for (const auto& r : log) {
    out << r.iter << ',' << r.cost << ',' << r.alpha << ',' << r.gradnorm << ',' << r.nrmse << ','
        << r.seconds << '\n';
  }
  return out.str();
}

}  // namespace huberlr
