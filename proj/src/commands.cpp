#include "huberlr/commands.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "huberlr/archive.hpp"

namespace huberlr {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string default_label(const ExperimentConfig& cfg) {
  std::string label = to_string(cfg.solver.method);
  if (cfg.solver.method == Method::NCG) {
    label += std::string("(") + to_string(cfg.solver.curvature);
    if (cfg.tail_k) label += ",tail";
    if (cfg.solver.fast_step) label += ",fast";
    label += ")";
  }
  return label;
}

fs::path canonical_or_same(const fs::path& p) {
  std::error_code ec;
  const fs::path c = fs::weakly_canonical(p, ec);
  return ec ? p : c;
}

}  // namespace

std::string cmd_generate(const ExperimentConfig& cfg, bool dry_run) {
  const PatchGeometry geom = cfg.geometry();
  const SyntheticParams& sp = cfg.synthetic;
  if (sp.acceleration > sp.frames) {
    throw Error(ErrorCode::InfeasibleMask, "acceleration exceeds the frame count");
  }
  std::ostringstream summary;
  summary << "image " << sp.image_x << "x" << sp.image_y << ", frames " << sp.frames << ", coils "
          << sp.coils << ", rank " << sp.rank << ", acceleration " << sp.acceleration << ", sigma "
          << sp.noise_sigma << ", patch " << geom.patch_x() << "x" << geom.patch_y()
          << ", |Gamma| " << geom.locations().size() << ", |Lambda| " << geom.shifts().size();
  if (dry_run) return "valid: " + summary.str();

  ReconstructionProblem p = generate_synthetic(sp, geom);
  if (cfg.lambda) p.lambda = *cfg.lambda;
  const fs::path dir = cfg.problem.empty() ? cfg.output : cfg.problem;
  save_problem(dir, p);
  return "wrote " + dir.string() + ": " + summary.str();
}

RunOutcome run_reconstruction(const ExperimentConfig& cfg, const ReconstructionProblem& problem) {
  ReconstructionProblem p = problem;
  if (cfg.patch) {
    p.geometry = PatchGeometry(p.geometry.image_x(), p.geometry.image_y(), cfg.patch->first,
                               cfg.patch->second);
  }
  const Eigen::Index r = std::min<Eigen::Index>(p.geometry.patch_voxels(), p.op->frames());
  const SpectralRegularizer reg = cfg.make_regularizer(r);
  const CMatrix x0 = datashare_init(p);

  double lambda = 0.0;
  if (cfg.lambda) lambda = *cfg.lambda;
  else if (p.lambda) lambda = *p.lambda;
  else lambda = default_lambda(p, reg, x0);

  SolverConfig solver = cfg.solver;
  RunOutcome out;
  out.label = cfg.label.empty() ? default_label(cfg) : cfg.label;
  if (solver.method == Method::NCG) {
    solver.lambda = lambda;
    out.lambda = lambda;
    out.result = ncg_solve(p, reg, solver, x0);
  } else {
    solver.lambda = cfg.baseline_lambda ? *cfg.baseline_lambda
                                        : nuclear_equivalent_lambda(reg.potential(), lambda);
    out.lambda = solver.lambda;
    out.result = solver.method == Method::FISTA_PA ? fista_pa_solve(p, solver, x0)
                                                   : pogm_pa_solve(p, solver, x0);
  }
  return out;
}

std::string cmd_reconstruct(const ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw Error(ErrorCode::Config, "reconstruct needs 'problem'");
  const ReconstructionProblem p = load_problem(cfg.problem);
  const RunOutcome run = run_reconstruction(cfg, p);

  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + cfg.output.string() + ": " + ec.message());
  write_matrix(cfg.output / "xhat", run.result.x);
  write_text(cfg.output / "log.csv", log_csv(run.result.log));

  const IterationRecord& last = run.result.log.back();
  std::ostringstream s;
  s << std::setprecision(10);
  s << "method = " << run.label << '\n'
    << "lambda = " << run.lambda << '\n'
    << "iterations = " << last.iter << '\n'
    << "final_cost = " << last.cost << '\n'
    << "final_nrmse = " << last.nrmse << '\n'
    << "final_gradnorm = " << last.gradnorm << '\n'
    << "wall_seconds = " << last.seconds << '\n'
    << "direction_resets = " << run.result.direction_resets << '\n';
  write_text(cfg.output / "summary", s.str());
  return s.str();
}

std::string compare_csv(const std::vector<RunOutcome>& runs) {
  std::ostringstream out;
  out << "method,iter,cost,nrmse,dist\n" << std::setprecision(17);
  for (const RunOutcome& run : runs) {
    const auto& iterates = run.result.iterates;
    if (iterates.empty()) throw Error(ErrorCode::InvalidArgument, "run has no stored iterates");
    const CMatrix& limit = iterates.back().second;
    std::size_t next = 0;
    for (const IterationRecord& rec : run.result.log) {
      while (next < iterates.size() && iterates[next].first < rec.iter) ++next;
      double dist = std::numeric_limits<double>::quiet_NaN();
      if (next < iterates.size() && iterates[next].first == rec.iter) {
        dist = dist_to_limit(iterates[next].second, limit);
      }
      out << run.label << ',' << rec.iter << ',' << rec.cost << ',' << rec.nrmse << ',' << dist << '\n';
    }
  }
  return out.str();
}

std::string cmd_compare(const std::vector<ExperimentConfig>& configs, const fs::path& output) {
  if (configs.empty()) throw Error(ErrorCode::Config, "compare needs at least one config");
  const fs::path problem_dir = canonical_or_same(configs.front().problem);
  for (const auto& c : configs) {
    if (canonical_or_same(c.problem) != problem_dir) {
      throw Error(ErrorCode::ProblemMismatch,
                  "runs use different problems: " + configs.front().problem.string() + " and " +
                      c.problem.string());
    }
  }
  const ReconstructionProblem p = load_problem(problem_dir);
  std::vector<RunOutcome> runs;
  for (ExperimentConfig c : configs) {
    if (c.solver.store_every <= 0) c.solver.store_every = 1;
    runs.push_back(run_reconstruction(c, p));
  }
  const std::string csv = compare_csv(runs);
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_text(output, csv);
  return csv;
}

std::string cmd_metrics(const fs::path& problem_dir, const fs::path& result_dir) {
  const ReconstructionProblem p = load_problem(problem_dir);
  const CMatrix x = read_matrix(result_dir / "xhat");
  std::ostringstream s;
  s << std::setprecision(10);
  s << "data_consistency = " << f_value(p, x) << '\n';
  if (p.truth) s << "nrmse = " << nrmse(x, *p.truth) << '\n';
  return s.str();
}

}  // namespace huberlr
