#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nuemt/es.hpp"
#include "nuemt/optimizer.hpp"

namespace nuemt {

// Progressive episode lengths: K stages of OpenAI-ES at horizons (s/K)*H,
// each with an equal share of the timestep budget and the full population.
struct PELConfig {
  ESConfig es;
  std::size_t stages = 2;
  std::size_t full_horizon = 1000;
  std::uint64_t budget = 0;  // total timesteps across all stages

  void validate() const;
  std::vector<std::size_t> horizons() const;
  // Cumulative timesteps at which stage s (1-based) ends: s * budget / K.
  std::uint64_t stage_end(std::size_t stage) const;
};

class PEL final : public Optimizer {
 public:
  PEL(PELConfig config, std::size_t dimension);

  // Runs the active stage for one iteration, then advances to the next stage
  // if the cumulative timesteps have reached the active stage's share.
  IterationOutcome step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                        std::uint64_t iteration_seed) override;
  const ParamVector& target_mean() const override { return es_.target_mean(); }

  std::size_t stage() const noexcept { return stage_; }  // 1-based
  std::uint64_t cumulative_timesteps() const noexcept { return consumed_; }

 private:
  PELConfig config_;
  std::vector<std::size_t> horizons_;
  OpenAIES es_;
  std::size_t stage_ = 1;
  std::uint64_t consumed_ = 0;
};

struct PELRun {
  ParamVector mean;
  std::vector<DriveRecord> log;
  RunningNormalizer normalizer;
};

PELRun pel_run(const PELConfig& config, const Evaluator& evaluator, std::uint64_t run_seed);

}  // namespace nuemt
