#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "huberlr/solvers.hpp"

namespace huberlr {

/// Everything a command needs, loaded from a YAML file with command-line
/// overrides applied on top. Unknown keys are rejected.
struct ExperimentConfig {
  // Problem source and destination.
  std::filesystem::path problem;
  std::filesystem::path output = "out";
  std::string label;

  // Generator.
  SyntheticParams synthetic;
  /// Patch size; generate defaults to 4 x 4, reconstruct to the archive's.
  std::optional<std::pair<int, int>> patch;

  // Regularizer.
  std::string potential = "hyperbola";
  double delta = 1e-3;
  /// Tail weights with this K; unset means the plain regularizer.
  std::optional<int> tail_k;

  // Solver. lambda/baseline_lambda unset means automatic.
  SolverConfig solver;
  std::optional<double> lambda;
  std::optional<double> baseline_lambda;

  PatchGeometry geometry() const;
  Potential make_potential() const;
  SpectralRegularizer make_regularizer(Eigen::Index patch_rank) const;
};

/// Keys accepted in the file and as --flags (dashes map to underscores).
const std::vector<std::string>& config_keys();

/// Parses YAML text, then applies overrides (key -> YAML scalar or flow
/// sequence text). Throws Error(Config) on unknown keys or bad values.
ExperimentConfig parse_config(const std::string& yaml_text,
                              const std::map<std::string, std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::map<std::string, std::string>& overrides = {});

}  // namespace huberlr
