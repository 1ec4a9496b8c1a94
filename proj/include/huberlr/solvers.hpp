#pragma once

#include <string>
#include <vector>

#include "huberlr/model.hpp"

namespace huberlr {

enum class Method { NCG, FISTA_PA, POGM_PA };

Method method_from_name(std::string_view name);
const char* to_string(Method m);

struct SolverConfig {
  Method method = Method::NCG;
  int max_iter = 100;
  double lambda = 0.0;
  int n_alpha = 1;
  double alpha0 = 0.0;
  Curvature curvature = Curvature::GR;
  bool fast_step = false;
  Shift sbar{};
  /// Stop once the gradient Frobenius norm drops below this.
  double grad_tol = 0.0;
  bool deterministic_reduce = true;
  /// Keep every k-th iterate (and the last one) in the result; 0 keeps none.
  int store_every = 0;

  void validate() const;
  LlrOptions llr_options() const {
    return {deterministic_reduce ? Reduction::Sequential : Reduction::Pairwise};
  }
};

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double alpha = 0.0;
  double gradnorm = 0.0;
  double nrmse = 0.0;  // NaN without ground truth
  double seconds = 0.0;
  bool cost_increased = false;
};

struct SolveResult {
  CMatrix x;
  std::vector<IterationRecord> log;
  std::vector<std::pair<int, CMatrix>> iterates;
  int direction_resets = 0;
  bool converged = false;  // stopped by the gradient threshold
};

/// Nonlinear conjugate gradients (Fletcher-Reeves) on
/// f(X) + lambda * llr_value(X) with majorize-minimize step sizes.
/// The direction is reset to -G whenever it stops being a descent direction.
SolveResult ncg_solve(const ReconstructionProblem& problem, const SpectralRegularizer& reg,
                      const SolverConfig& cfg, const CMatrix& x0);

/// ||G_new||^2 / ||G_old||^2.
double fletcher_reeves_beta(const CMatrix& g_new, const CMatrix& g_old);

/// Singular value soft-thresholding U diag(max(sigma - tau, 0)) V^H.
CMatrix svt(const CMatrix& c, double tau);

/// Proximal-average approximation of the prox of
/// tau * sum_{s,p} ||P_p(S_s(X))||_*: every term is thresholded at tau and
/// the per-term corrections are averaged over the |Lambda| shifts covering
/// each voxel.
CMatrix prox_average_llr(const CMatrix& x, const PatchGeometry& geom, double tau);

/// sum_{s,p} ||P_p(S_s(X))||_*.
double llr_nuclear(const CMatrix& x, const PatchGeometry& geom);

/// ||A||^2 by power iteration on A^*A from a fixed random start.
double estimate_lipschitz(const LinearOperator& op, int iterations = 20,
                          std::uint64_t seed = 0x5eedULL);

/// Baselines on f(X) + lambda * llr_nuclear(X) with step 1/L.
SolveResult fista_pa_solve(const ReconstructionProblem& problem, const SolverConfig& cfg,
                           const CMatrix& x0);
SolveResult pogm_pa_solve(const ReconstructionProblem& problem, const SolverConfig& cfg,
                          const CMatrix& x0);

/// ||X - ref||_F / ||ref||_F. Throws ZeroReference.
double nrmse(const CMatrix& x, const CMatrix& ref);
/// ||X_k - X_inf||_F^2 / ||X_inf||_F^2. Throws ZeroReference.
double dist_to_limit(const CMatrix& xk, const CMatrix& x_inf);

/// lambda such that lambda * ||grad llr(X0)|| = ratio * ||grad f(X0)||, using
/// the unweighted form of reg.
double default_lambda(const ReconstructionProblem& problem, const SpectralRegularizer& reg,
                      const CMatrix& x0, double ratio = 0.1);

/// Nuclear-norm weight matching lambda * R: the hyperbola behaves like
/// delta * |t| away from zero.
double nuclear_equivalent_lambda(const Potential& potential, double lambda);

/// CSV with header iter,cost,alpha,gradnorm,nrmse,seconds.
std::string log_csv(const std::vector<IterationRecord>& log);

}  // namespace huberlr
