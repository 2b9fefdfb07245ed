#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "nuemt/eval_engine.hpp"
#include "nuemt/policy.hpp"
#include "nuemt/problem.hpp"
#include "nuemt/sampling.hpp"

namespace nuemt {

enum class Shaping { ranked, raw };

// Where fitness comes from: the problem, the shared noise table and the
// worker pool that evaluates populations.
struct Evaluator {
  const Problem& problem;
  const NoiseTable& noise;
  const EvalEngine& engine;
};

// What one optimizer iteration reports back to the driver.
struct IterationOutcome {
  std::uint64_t timesteps = 0;
  std::size_t stage = 0;  // active PEL stage (1-based); 0 for stage-free algorithms
  std::vector<std::size_t> horizons;
  std::vector<double> task_mean_returns;  // NaN for tasks that sampled nothing
  std::vector<double> target_coefficients;
  std::vector<std::size_t> allocations;
  RunningNormalizer observations;  // statistics to fold in at the barrier
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;

  // Runs one iteration against a normalizer frozen for its duration.
  virtual IterationOutcome step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                                std::uint64_t iteration_seed) = 0;
  virtual const ParamVector& target_mean() const = 0;
};

std::uint64_t iteration_seed(std::uint64_t run_seed, std::uint64_t iteration);

struct DriveRecord {
  std::uint64_t iteration = 0;
  std::uint64_t cumulative_timesteps = 0;
  IterationOutcome outcome;
};

// Steps `optimizer` until cumulative timesteps reach `budget` (at least one
// iteration). The normalizer is updated once per iteration, after the step.
// `on_iteration` sees the normalizer as it will be used by the next iteration.
void drive(Optimizer& optimizer, const Evaluator& evaluator, std::uint64_t budget,
           std::uint64_t run_seed, RunningNormalizer& normalizer,
           const std::function<void(const DriveRecord&, const RunningNormalizer&)>& on_iteration);

}  // namespace nuemt
