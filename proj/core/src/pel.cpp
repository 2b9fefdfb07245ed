#include "nuemt/pel.hpp"

#include "nuemt/errors.hpp"
#include "nuemt/nuemt.hpp"

namespace nuemt {

void PELConfig::validate() const {
  es.validate();
  require(stages >= 1, "PEL needs at least one stage");
  require(full_horizon >= stages, "PEL full horizon must be at least K");
  require(budget > 0, "PEL budget must be positive");
}

std::vector<std::size_t> PELConfig::horizons() const {
  return task_horizons(stages, full_horizon);
}

std::uint64_t PELConfig::stage_end(std::size_t stage) const {
  return stage * budget / stages;
}

PEL::PEL(PELConfig config, std::size_t dimension)
    : config_(config), horizons_(config_.horizons()),
      es_(config_.es, dimension, horizons_.front()) {
  config_.validate();
}

IterationOutcome PEL::step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                           std::uint64_t seed) {
  IterationOutcome out = es_.step(evaluator, normalizer, seed);
  out.stage = stage_;
  consumed_ += out.timesteps;
  // Transitions happen only at iteration boundaries; the next stage starts
  // from the mean this one finished with.
  if (stage_ < config_.stages && consumed_ >= config_.stage_end(stage_)) {
    ++stage_;
    es_.set_horizon(horizons_[stage_ - 1]);
  }
  return out;
}

PELRun pel_run(const PELConfig& config, const Evaluator& evaluator, std::uint64_t run_seed) {
  PEL pel(config, evaluator.problem.dimension());
  PELRun run;
  run.normalizer = RunningNormalizer(evaluator.problem.observation_dim());
  drive(pel, evaluator, config.budget, run_seed, run.normalizer,
        [&](const DriveRecord& record, const RunningNormalizer&) {
          DriveRecord copy = record;
          copy.outcome.observations = RunningNormalizer();
          run.log.push_back(std::move(copy));
        });
  run.mean = pel.target_mean();
  return run;
}

}  // namespace nuemt
