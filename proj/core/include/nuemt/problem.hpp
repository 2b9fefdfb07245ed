#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nuemt/environment.hpp"
#include "nuemt/policy.hpp"

namespace nuemt {

// Analytic fitness oracles. "sphere" is F(x) = -||x - x*||^2 with the first
// optimum; "staged_sphere_<i>" (1-based) uses optimum i.
class SyntheticFitness {
 public:
  explicit SyntheticFitness(std::vector<ParamVector> optima);

  std::size_t dimension() const noexcept { return optima_.front().size(); }
  const std::vector<ParamVector>& optima() const noexcept { return optima_; }

  double operator()(std::string_view name, std::span<const double> theta) const;
  double staged(std::size_t task, std::span<const double> theta) const;  // task is 0-based

 private:
  std::vector<ParamVector> optima_;
};

// Free-function form. Throws ConfigError for an unknown name.
double synthetic_fitness(std::string_view name, std::span<const double> theta,
                         const SyntheticFitness& suite);

struct EvalRequest {
  std::size_t task = 0;  // 0-based task index
  std::size_t horizon = 1;
  std::uint64_t episode_seed = 0;
};

struct Evaluation {
  double fitness = 0.0;
  std::size_t timesteps = 0;
  RunningNormalizer observations;  // statistics of the states visited
};

// What the optimizers maximize. Implementations must be safe to call
// concurrently from several threads.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t observation_dim() const = 0;
  // Horizon used when nothing else is specified.
  virtual std::size_t max_horizon() const = 0;
  virtual Evaluation evaluate(std::span<const double> theta, const EvalRequest& request,
                              const RunningNormalizer& normalizer) const = 0;
};

// Episode return of an MLP policy in a registered environment.
class PolicyProblem final : public Problem {
 public:
  PolicyProblem(std::string env_id, std::vector<std::size_t> hidden_sizes = {64, 64});

  const EnvSpec& env() const noexcept { return env_; }
  const PolicySpec& policy() const noexcept { return policy_; }

  std::size_t dimension() const override;
  std::size_t observation_dim() const override { return env_.obs_dim; }
  std::size_t max_horizon() const override { return env_.max_horizon; }
  Evaluation evaluate(std::span<const double> theta, const EvalRequest& request,
                      const RunningNormalizer& normalizer) const override;

 private:
  EnvSpec env_;
  PolicySpec policy_;
};

// Staged-sphere oracle; task i evaluates F_i. Each evaluation costs one
// timestep and the horizon is ignored.
class SyntheticProblem final : public Problem {
 public:
  explicit SyntheticProblem(SyntheticFitness fitness) : fitness_(std::move(fitness)) {}

  const SyntheticFitness& fitness() const noexcept { return fitness_; }

  std::size_t dimension() const override { return fitness_.dimension(); }
  std::size_t observation_dim() const override { return 0; }
  std::size_t max_horizon() const override { return 1; }
  Evaluation evaluate(std::span<const double> theta, const EvalRequest& request,
                      const RunningNormalizer& normalizer) const override;

 private:
  SyntheticFitness fitness_;
};

}  // namespace nuemt
