#include "nuemt/problem.hpp"

#include <charconv>

#include "nuemt/errors.hpp"

namespace nuemt {

SyntheticFitness::SyntheticFitness(std::vector<ParamVector> optima) : optima_(std::move(optima)) {
  require(!optima_.empty(), "synthetic fitness needs at least one optimum");
  for (const auto& o : optima_) {
    require(!o.empty() && o.size() == optima_.front().size(),
            "synthetic optima must share a nonzero dimension");
  }
}

double SyntheticFitness::staged(std::size_t task, std::span<const double> theta) const {
  require(task < optima_.size(), "staged sphere task index out of range");
  const auto& opt = optima_[task];
  require(theta.size() == opt.size(), "synthetic fitness: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < opt.size(); ++i) {
    const double d = theta[i] - opt[i];
    sq += d * d;
  }
  return -sq;
}

double SyntheticFitness::operator()(std::string_view name, std::span<const double> theta) const {
  if (name == "sphere") return staged(0, theta);
  constexpr std::string_view prefix = "staged_sphere_";
  if (name.starts_with(prefix)) {
    const auto digits = name.substr(prefix.size());
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && index >= 1 &&
        index <= optima_.size()) {
      return staged(index - 1, theta);
    }
  }
  throw ConfigError("name", "unknown synthetic fitness '" + std::string(name) + "'");
}

double synthetic_fitness(std::string_view name, std::span<const double> theta,
                         const SyntheticFitness& suite) {
  return suite(name, theta);
}

PolicyProblem::PolicyProblem(std::string env_id, std::vector<std::size_t> hidden_sizes)
    : env_(environment_spec(env_id)), policy_(policy_for(env_, std::move(hidden_sizes))) {}

std::size_t PolicyProblem::dimension() const { return parameter_count(policy_); }

Evaluation PolicyProblem::evaluate(std::span<const double> theta, const EvalRequest& request,
                                   const RunningNormalizer& normalizer) const {
  // Environment and network scratch are cheap and thread-local per call.
  auto env = make_environment(env_.id);
  PolicyNetwork net(policy_);
  RolloutResult r = rollout(*env, net, theta, request.horizon, request.episode_seed, normalizer);
  Evaluation out;
  out.fitness = r.episode.total_return;
  out.timesteps = r.episode.timesteps_used;
  out.observations = RunningNormalizer(env_.obs_dim);
  out.observations.push_rows(r.observations);
  return out;
}

Evaluation SyntheticProblem::evaluate(std::span<const double> theta, const EvalRequest& request,
                                      const RunningNormalizer& /*normalizer*/) const {
  const std::size_t task = std::min(request.task, fitness_.optima().size() - 1);
  return Evaluation{fitness_.staged(task, theta), 1, RunningNormalizer(0)};
}

}  // namespace nuemt
