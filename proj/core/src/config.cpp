#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nuemt/environment.hpp"
#include "nuemt/errors.hpp"
#include "nuemt/experiment.hpp"

namespace nuemt {

using nlohmann::json;

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::nuemt: return "nuemt";
    case Algorithm::openai_es: return "openai_es";
    case Algorithm::pel: return "pel";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "nuemt") return Algorithm::nuemt;
  if (name == "openai_es") return Algorithm::openai_es;
  if (name == "pel") return Algorithm::pel;
  throw ConfigError("algorithm", "unknown algorithm '" + std::string(name) +
                                     "' (expected nuemt, openai_es or pel)");
}

namespace {

std::string_view shaping_name(Shaping s) { return s == Shaping::ranked ? "ranked" : "raw"; }

Shaping parse_shaping(std::string_view name) {
  if (name == "ranked") return Shaping::ranked;
  if (name == "raw") return Shaping::raw;
  throw ConfigError("shaping", "expected 'ranked' or 'raw'");
}

// Typed field readers: every failure names the key it came from.
std::uint64_t read_unsigned(const json& v, const char* key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double read_number(const json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
  return x;
}

std::string read_string(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

bool read_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

template <typename T>
std::vector<T> read_unsigned_list(const json& v, const char* key) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of nonnegative integers");
  std::vector<T> out;
  for (const auto& e : v) out.push_back(static_cast<T>(read_unsigned(e, key)));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& envs = registered_environments();
  if (std::find(envs.begin(), envs.end(), env_id) == envs.end()) {
    throw ConfigError("env_id", "unknown environment '" + env_id + "'");
  }
  const EnvSpec env = environment_spec(env_id);
  if (tasks < 1) throw ConfigError("K", "must be at least 1");
  if (algorithm == Algorithm::openai_es && tasks != 1) {
    throw ConfigError("K", "openai_es runs a single task, K must be 1");
  }
  if (horizon < tasks) throw ConfigError("H", "must be at least K");
  if (horizon > env.max_horizon) {
    throw ConfigError("H", "exceeds the environment's maximum horizon of " +
                               std::to_string(env.max_horizon));
  }
  if (total_population < 2 || total_population % 2 != 0) {
    throw ConfigError("N_total", "must be a positive even number (mirrored pairs)");
  }
  if (algorithm == Algorithm::nuemt && total_population < 2 * tasks) {
    throw ConfigError("N_total", "must be at least 2K so every task can hold a pair");
  }
  if (!(sigma > 0.0)) throw ConfigError("sigma", "must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  if (!(beta > 0.0)) throw ConfigError("beta", "must be positive");
  if (!(trust_radius > 0.0)) throw ConfigError("r", "must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay", "must be nonnegative");
  if (!(epsilon_self > 0.0) || epsilon_self > 1.0 / static_cast<double>(tasks)) {
    throw ConfigError("epsilon_self", "must lie in (0, 1/K]");
  }
  if (budget == 0) throw ConfigError("budget", "must be positive");
  if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds", "contains duplicates");
  }
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ConfigError("hidden_sizes", "layer widths must be positive");
  }
  const std::size_t dim = parameter_count(policy_for(env, hidden_sizes));
  if (noise_table_size <= dim) {
    throw ConfigError("noise_table_size", "must exceed the parameter count (" +
                                              std::to_string(dim) + ")");
  }
  if (eval_episodes < 1) throw ConfigError("eval_episodes", "must be at least 1");
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");

  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "algorithm") c.algorithm = parse_algorithm(read_string(v, k));
    else if (key == "env_id") c.env_id = read_string(v, k);
    else if (key == "K") c.tasks = read_unsigned(v, k);
    else if (key == "H") c.horizon = read_unsigned(v, k);
    else if (key == "N_total") c.total_population = read_unsigned(v, k);
    else if (key == "sigma") c.sigma = read_number(v, k);
    else if (key == "alpha") c.alpha = read_number(v, k);
    else if (key == "beta") c.beta = read_number(v, k);
    else if (key == "r") c.trust_radius = read_number(v, k);
    else if (key == "weight_decay") c.weight_decay = read_number(v, k);
    else if (key == "epsilon_self") c.epsilon_self = read_number(v, k);
    else if (key == "shaping") c.shaping = parse_shaping(read_string(v, k));
    else if (key == "learn_coefficients") c.learn_coefficients = read_bool(v, k);
    else if (key == "budget") c.budget = read_unsigned(v, k);
    else if (key == "seeds") c.seeds = read_unsigned_list<std::uint64_t>(v, k);
    else if (key == "workers") c.workers = read_unsigned(v, k);
    else if (key == "output_dir") c.output_dir = read_string(v, k);
    else if (key == "hidden_sizes") c.hidden_sizes = read_unsigned_list<std::size_t>(v, k);
    else if (key == "noise_table_size") c.noise_table_size = read_unsigned(v, k);
    else if (key == "noise_seed") c.noise_seed = read_unsigned(v, k);
    else if (key == "eval_episodes") c.eval_episodes = read_unsigned(v, k);
    else throw ConfigError(key, "unknown configuration key");
  }
  // Plain ES has exactly one task whatever K says.
  if (c.algorithm == Algorithm::openai_es) c.tasks = 1;
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(algorithm_name(c.algorithm));
  j["env_id"] = c.env_id;
  j["K"] = c.tasks;
  j["H"] = c.horizon;
  j["N_total"] = c.total_population;
  j["sigma"] = c.sigma;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["r"] = c.trust_radius;
  j["weight_decay"] = c.weight_decay;
  j["epsilon_self"] = c.epsilon_self;
  j["shaping"] = std::string(shaping_name(c.shaping));
  j["learn_coefficients"] = c.learn_coefficients;
  j["budget"] = c.budget;
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["hidden_sizes"] = c.hidden_sizes;
  j["noise_table_size"] = c.noise_table_size;
  j["noise_seed"] = c.noise_seed;
  j["eval_episodes"] = c.eval_episodes;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

NuEMTConfig nuemt_config(const ExperimentConfig& c) {
  NuEMTConfig n;
  n.total_population = c.total_population;
  n.tasks = c.tasks;
  n.full_horizon = c.horizon;
  n.sigma = c.sigma;
  n.step_size = c.alpha;
  n.mixture_step_size = c.beta;
  n.trust_radius = c.trust_radius;
  n.self_floor = c.epsilon_self;
  n.weight_decay = c.weight_decay;
  n.shaping = c.shaping;
  n.learn_coefficients = c.learn_coefficients;
  return n;
}

ESConfig es_config(const ExperimentConfig& c) {
  ESConfig e;
  e.step_size = c.alpha;
  e.sigma = c.sigma;
  e.population = c.total_population;
  e.weight_decay = c.weight_decay;
  e.shaping = c.shaping;
  return e;
}

}  // namespace nuemt
