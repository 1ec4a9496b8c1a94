#include "huberlr/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace huberlr {

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, "bad value for '" + key + "': " + e.what());
  }
}

std::pair<int, int> pair_of_ints(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() != 2) {
    throw Error(ErrorCode::Config, "'" + key + "' must be a two-element list");
  }
  return {scalar<int>(node[0], key), scalar<int>(node[1], key)};
}

void assign(ExperimentConfig& cfg, const std::string& key, const YAML::Node& v) {
  SolverConfig& s = cfg.solver;
  SyntheticParams& g = cfg.synthetic;
  if (key == "problem") cfg.problem = scalar<std::string>(v, key);
  else if (key == "output") cfg.output = scalar<std::string>(v, key);
  else if (key == "label") cfg.label = scalar<std::string>(v, key);
  else if (key == "seed") g.seed = scalar<std::uint64_t>(v, key);
  else if (key == "image") std::tie(g.image_x, g.image_y) = pair_of_ints(v, key);
  else if (key == "frames") g.frames = scalar<int>(v, key);
  else if (key == "coils") g.coils = scalar<int>(v, key);
  else if (key == "rank") g.rank = scalar<int>(v, key);
  else if (key == "acceleration") g.acceleration = scalar<double>(v, key);
  else if (key == "sigma") g.noise_sigma = scalar<double>(v, key);
  else if (key == "patch") cfg.patch = pair_of_ints(v, key);
  else if (key == "potential") cfg.potential = scalar<std::string>(v, key);
  else if (key == "delta") cfg.delta = scalar<double>(v, key);
  else if (key == "K") {
    if (v.IsNull() || (v.IsScalar() && v.Scalar() == "none")) cfg.tail_k.reset();
    else cfg.tail_k = scalar<int>(v, key);
  }
  else if (key == "method") s.method = method_from_name(scalar<std::string>(v, key));
  else if (key == "max_iter") s.max_iter = scalar<int>(v, key);
  else if (key == "lambda") cfg.lambda = scalar<double>(v, key);
  else if (key == "baseline_lambda") cfg.baseline_lambda = scalar<double>(v, key);
  else if (key == "n_alpha") s.n_alpha = scalar<int>(v, key);
  else if (key == "alpha0") s.alpha0 = scalar<double>(v, key);
  else if (key == "curvature") s.curvature = curvature_from_name(scalar<std::string>(v, key));
  else if (key == "fast_step") s.fast_step = scalar<bool>(v, key);
  else if (key == "sbar") {
    const auto [x, y] = pair_of_ints(v, key);
    s.sbar = {x, y};
  }
  else if (key == "grad_tol") s.grad_tol = scalar<double>(v, key);
  else if (key == "deterministic_reduce") s.deterministic_reduce = scalar<bool>(v, key);
  else if (key == "store_every") s.store_every = scalar<int>(v, key);
  else throw Error(ErrorCode::Config, "unknown key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "problem",  "output",    "label",         "seed",     "image",    "frames",
      "coils",    "rank",      "acceleration",  "sigma",    "patch",    "potential",
      "delta",    "K",         "method",        "max_iter", "lambda",   "baseline_lambda",
      "n_alpha",  "alpha0",    "curvature",     "fast_step", "sbar",    "grad_tol",
      "deterministic_reduce",  "store_every"};
  return keys;
}

ExperimentConfig parse_config(const std::string& yaml_text,
                              const std::map<std::string, std::string>& overrides) {
  YAML::Node root;
  try {
    root = yaml_text.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, std::string("cannot parse config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw Error(ErrorCode::Config, "config must be a mapping of key: value");

  ExperimentConfig cfg;
  try {
    for (const auto& kv : root) assign(cfg, kv.first.as<std::string>(), kv.second);
    for (const auto& [key, text] : overrides) assign(cfg, key, YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

PatchGeometry ExperimentConfig::geometry() const {
  const auto [px, py] = patch.value_or(std::pair{4, 4});
  return PatchGeometry(synthetic.image_x, synthetic.image_y, px, py);
}

Potential ExperimentConfig::make_potential() const { return Potential::from_name(potential, delta); }

SpectralRegularizer ExperimentConfig::make_regularizer(Eigen::Index patch_rank) const {
  if (tail_k) return SpectralRegularizer::tail(make_potential(), patch_rank, *tail_k);
  return SpectralRegularizer::plain(make_potential());
}

}  // namespace huberlr
