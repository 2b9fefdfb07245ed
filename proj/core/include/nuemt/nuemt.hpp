#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nuemt/es.hpp"
#include "nuemt/optimizer.hpp"

namespace nuemt {

struct NuEMTConfig {
  std::size_t total_population = 64;
  std::size_t tasks = 2;  // K; task K-1 (0-based) is the target
  std::size_t full_horizon = 1000;
  double sigma = 0.02;
  double step_size = 0.05;          // alpha
  double mixture_step_size = 0.05;  // beta
  double trust_radius = 1.0;        // r, in sigma units
  double self_floor = 1e-3;
  double weight_decay = 0.005;
  Shaping shaping = Shaping::ranked;
  bool learn_coefficients = true;

  void validate() const;
};

// round(i/K * H) for i = 1..K.
std::vector<std::size_t> task_horizons(std::size_t tasks, std::size_t full_horizon);

struct MultitaskState {
  std::vector<ParamVector> means;                 // one per task
  std::vector<std::vector<double>> coefficients;  // coefficients[i] has i+1 entries
  std::vector<std::size_t> horizons;
  std::vector<std::size_t> populations;
  std::uint64_t timesteps = 0;

  // Throws ContractViolation if any simplex or allocation invariant fails.
  void validate(const NuEMTConfig& config) const;
};

// Uniform coefficients, equal populations, zero means.
MultitaskState initial_state(const NuEMTConfig& config, std::size_t dimension);

// Mixture of task `task` over the current means of tasks 0..task.
MixtureState task_mixture(const MultitaskState& state, std::size_t task, double sigma);

// b_j = (1/N) sum_k u_k p_j(theta_k) / q(theta_k), with the unprojected
// samples and the (uncentred) utilities stored in the records.
std::vector<double> coefficient_gradient(std::span<const SampleRecord> records,
                                         const MixtureState& mix, const NoiseTable& noise);

// beta * (b - mean(b)): the gradient projected onto the plane sum(w) = 1.
std::vector<double> project_to_plane(std::span<const double> b, double beta);

// w + lambda * d with lambda the largest value in (0, 1] keeping every entry
// at or above its floor (0 for foreign components, self_floor for the last).
// Coordinates already pinned at their floor with a negative direction are
// held fixed and the direction is re-projected over the remaining ones.
std::vector<double> simplex_step(std::span<const double> w, std::span<const double> b,
                                 double beta, double self_floor);

// N_j proportional to w_{K,j}; the target gets at least N_total/K (rounded up
// to even) and auxiliaries share the rest by largest remainder, all even.
std::vector<std::size_t> allocate_populations(std::span<const double> target_coefficients,
                                              std::size_t total_population, std::size_t tasks);

struct TaskReport {
  std::size_t population = 0;
  double mean_fitness = 0.0;  // NaN when population is zero
  std::uint64_t timesteps = 0;
  std::vector<SampleRecord> records;
  ParamVector mean_gradient;
  std::vector<double> coefficient_gradient;
};

struct NuEMTStep {
  MultitaskState state;
  std::vector<TaskReport> tasks;
  std::uint64_t timesteps = 0;
  RunningNormalizer observations;
};

// One sweep over all tasks in ascending order. Task i samples from a mixture
// built on the already-updated means of tasks before it.
NuEMTStep nuemt_iteration(const MultitaskState& state, const NuEMTConfig& config,
                          const Evaluator& evaluator, const RunningNormalizer& normalizer,
                          std::uint64_t iteration_seed);

class NuEMT final : public Optimizer {
 public:
  NuEMT(NuEMTConfig config, std::size_t dimension);
  NuEMT(NuEMTConfig config, MultitaskState state);

  IterationOutcome step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                        std::uint64_t iteration_seed) override;
  const ParamVector& target_mean() const override { return state_.means.back(); }

  const MultitaskState& state() const noexcept { return state_; }
  const NuEMTConfig& config() const noexcept { return config_; }

 private:
  NuEMTConfig config_;
  MultitaskState state_;
};

}  // namespace nuemt
