#include "nuemt/optimizer.hpp"

#include "nuemt/errors.hpp"
#include "nuemt/random.hpp"

namespace nuemt {

std::uint64_t iteration_seed(std::uint64_t run_seed, std::uint64_t iteration) {
  return derive_seed(run_seed, {iteration, 0x17E2u});
}

void drive(Optimizer& optimizer, const Evaluator& evaluator, std::uint64_t budget,
           std::uint64_t run_seed, RunningNormalizer& normalizer,
           const std::function<void(const DriveRecord&, const RunningNormalizer&)>& on_iteration) {
  require(budget > 0, "timestep budget must be positive");
  DriveRecord record;
  do {
    record.outcome = optimizer.step(evaluator, normalizer, iteration_seed(run_seed, record.iteration));
    require(record.outcome.timesteps > 0, "an iteration consumed no timesteps");
    record.cumulative_timesteps += record.outcome.timesteps;
    normalizer.merge(record.outcome.observations);
    if (on_iteration) on_iteration(record, normalizer);
    ++record.iteration;
  } while (record.cumulative_timesteps < budget);
}

}  // namespace nuemt
