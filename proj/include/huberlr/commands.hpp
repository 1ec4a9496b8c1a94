#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "huberlr/config.hpp"

namespace huberlr {

/// Validates the generator settings and geometry. With dry_run nothing is
/// generated or written. Returns a one-line summary.
std::string cmd_generate(const ExperimentConfig& cfg, bool dry_run = false);

struct RunOutcome {
  SolveResult result;
  double lambda = 0.0;  // weight actually used by the solver
  std::string label;
};

/// Runs one reconstruction on an archived problem without touching disk.
RunOutcome run_reconstruction(const ExperimentConfig& cfg, const ReconstructionProblem& problem);

/// Loads cfg.problem, reconstructs, writes xhat, log.csv and summary into
/// cfg.output. Returns the summary text.
std::string cmd_reconstruct(const ExperimentConfig& cfg);

/// Runs every config on the same problem and writes the long-format CSV
/// method,iter,cost,nrmse,dist where dist is measured against each run's own
/// final iterate. Throws ProblemMismatch if the configs name different
/// problems.
std::string cmd_compare(const std::vector<ExperimentConfig>& configs,
                        const std::filesystem::path& output);

/// Long-format comparison CSV from finished runs (iterates must be stored).
std::string compare_csv(const std::vector<RunOutcome>& runs);

/// NRMSE and data-consistency of a stored result against a problem.
std::string cmd_metrics(const std::filesystem::path& problem_dir,
                        const std::filesystem::path& result_dir);

}  // namespace huberlr
