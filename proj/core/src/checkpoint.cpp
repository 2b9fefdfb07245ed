#include "nuemt/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nuemt/errors.hpp"

namespace nuemt {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "nuemt.checkpoint";

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format"] = kFormat;
  j["version"] = Checkpoint::kVersion;
  j["env_id"] = c.env_id;
  j["horizon"] = c.horizon;
  j["policy"] = {{"obs_dim", c.policy.obs_dim},
                 {"action_dim", c.policy.action_dim},
                 {"hidden_sizes", c.policy.hidden_sizes},
                 {"action_low", c.policy.action_low},
                 {"action_high", c.policy.action_high}};
  j["params"] = c.params;
  j["normalizer"] = {{"count", c.normalizer.count()},
                     {"mean", c.normalizer.mean()},
                     {"m2", c.normalizer.m2()}};
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint", std::string("not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw ConfigError("format", "not a nuemt checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != Checkpoint::kVersion) {
      throw ConfigError("version", "unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.env_id = j.at("env_id").get<std::string>();
    c.horizon = j.at("horizon").get<std::size_t>();
    const auto& p = j.at("policy");
    c.policy.obs_dim = p.at("obs_dim").get<std::size_t>();
    c.policy.action_dim = p.at("action_dim").get<std::size_t>();
    c.policy.hidden_sizes = p.at("hidden_sizes").get<std::vector<std::size_t>>();
    c.policy.action_low = p.at("action_low").get<std::vector<double>>();
    c.policy.action_high = p.at("action_high").get<std::vector<double>>();
    c.params = j.at("params").get<ParamVector>();
    const auto& n = j.at("normalizer");
    c.normalizer = RunningNormalizer(n.at("count").get<std::uint64_t>(),
                                     n.at("mean").get<std::vector<double>>(),
                                     n.at("m2").get<std::vector<double>>());
    c.policy.validate();
    if (c.params.size() != parameter_count(c.policy)) {
      throw ConfigError("params", "checkpoint has " + std::to_string(c.params.size()) +
                                      " parameters, architecture needs " +
                                      std::to_string(parameter_count(c.policy)));
    }
    if (c.normalizer.dim() != c.policy.obs_dim) {
      throw ConfigError("normalizer", "normalizer dimension differs from obs_dim");
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError("checkpoint", e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace nuemt
