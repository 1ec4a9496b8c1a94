// Command-line harness: generate synthetic problems, reconstruct, compare
// methods and compute metrics.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "huberlr/commands.hpp"

namespace {

using Overrides = std::map<std::string, std::string>;

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

// One string option per config key; set values become overrides.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool fast_step = false;
  bool deterministic = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "YAML config file; flags override its values");
    for (const std::string& key : huberlr::config_keys()) {
      if (key == "fast_step" || key == "deterministic_reduce") continue;
      app->add_option(flag_name(key), values[key], "config key '" + key + "'");
    }
    app->add_flag("--fast-step", fast_step, "single-shift step-size heuristic");
    app->add_flag("--deterministic-reduce", deterministic, "fixed-order reductions");
  }

  Overrides overrides(CLI::App* app) const {
    Overrides out;
    for (const auto& [key, value] : values) {
      if (app->count(flag_name(key)) > 0) out[key] = value;
    }
    if (fast_step) out["fast_step"] = "true";
    if (deterministic) out["deterministic_reduce"] = "true";
    return out;
  }

  huberlr::ExperimentConfig load(CLI::App* app, const std::string& file) const {
    if (file.empty()) return huberlr::parse_config("", overrides(app));
    return huberlr::load_config(file, overrides(app));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth locally low-rank reconstruction with Huber-based spectral regularizers"};
  app.require_subcommand(1);

  ConfigFlags gen_flags, rec_flags, cmp_flags;
  bool dry_run = false;
  auto* gen = app.add_subcommand("generate", "write a synthetic problem archive");
  gen_flags.attach(gen);
  gen->add_flag("--dry-run", dry_run, "validate settings without generating");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct an archived problem");
  rec_flags.attach(rec);

  std::vector<std::string> compare_files;
  std::string compare_out = "compare.csv";
  auto* cmp = app.add_subcommand("compare", "run several configs on one problem");
  cmp_flags.attach(cmp);
  cmp->add_option("--runs", compare_files, "one YAML config per method")->required();
  cmp->add_option("--csv", compare_out, "combined CSV path");

  std::string metrics_problem, metrics_result;
  auto* met = app.add_subcommand("metrics", "NRMSE and data consistency of a result");
  met->add_option("--problem", metrics_problem, "problem archive directory")->required();
  met->add_option("--result", metrics_result, "directory holding xhat")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::cout << huberlr::cmd_generate(gen_flags.load(gen, gen_flags.config_file), dry_run) << '\n';
    } else if (rec->parsed()) {
      std::cout << huberlr::cmd_reconstruct(rec_flags.load(rec, rec_flags.config_file));
    } else if (cmp->parsed()) {
      std::vector<huberlr::ExperimentConfig> configs;
      for (const auto& f : compare_files) configs.push_back(cmp_flags.load(cmp, f));
      huberlr::cmd_compare(configs, compare_out);
      std::cout << "wrote " << compare_out << '\n';
    } else if (met->parsed()) {
      std::cout << huberlr::cmd_metrics(metrics_problem, metrics_result);
    }
  } catch (const huberlr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
