#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nuemt/optimizer.hpp"

namespace nuemt {

struct ESConfig {
  double step_size = 0.05;  // alpha
  double sigma = 0.02;
  std::size_t population = 64;  // even: mirrored pairs
  double weight_decay = 0.005;
  Shaping shaping = Shaping::ranked;

  void validate() const;
};

// Log-rank utilities indexed like `fitness`: the k-th best sample (ties broken
// by lower index) gets max(0, ln(N/2 + 1) - ln k), normalized to sum to one.
std::vector<double> rank_utilities(std::span<const double> fitness);

std::vector<double> mean_centered(std::span<const double> values);

// center + step * g, with g = scale * sum_k coeff_k (points_k - center) - decay * center.
struct AscentStep {
  ParamVector mean;
  ParamVector gradient;
};
AscentStep ascent_step(const ParamVector& center, std::span<const ParamVector> points,
                       std::span<const double> coeffs, double scale, double step, double decay);

// Evaluates sampled records at `horizon`, filling fitness and timesteps, and
// returns the merged observation statistics. Non-finite fitness aborts.
RunningNormalizer evaluate_records(std::span<SampleRecord> records, const MixtureState& mix,
                                   std::size_t task, std::size_t horizon,
                                   const Evaluator& evaluator,
                                   const RunningNormalizer& normalizer);

// Fitness values in shaped form: ranked utilities (stored in each record's
// `utility`, uncentred) and the coefficients that weight the mean gradient.
std::vector<double> shape_fitness(std::span<SampleRecord> records, Shaping shaping);

struct ESStep {
  ParamVector mean;
  ParamVector gradient;
  std::vector<SampleRecord> records;
  double mean_fitness = 0.0;
  std::uint64_t timesteps = 0;
  RunningNormalizer observations;
};

// One iteration of mirrored OpenAI-ES around `mean`. `task` only salts the
// sampling streams.
ESStep es_iteration(const ParamVector& mean, const ESConfig& config, const Evaluator& evaluator,
                    const RunningNormalizer& normalizer, std::uint64_t iteration_seed,
                    std::size_t horizon, std::size_t task = 0);

class OpenAIES final : public Optimizer {
 public:
  OpenAIES(ESConfig config, std::size_t dimension, std::size_t horizon);
  OpenAIES(ESConfig config, ParamVector initial_mean, std::size_t horizon);

  IterationOutcome step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                        std::uint64_t iteration_seed) override;
  const ParamVector& target_mean() const override { return mean_; }

  const ESConfig& config() const noexcept { return config_; }
  std::size_t horizon() const noexcept { return horizon_; }
  void set_horizon(std::size_t horizon) noexcept { horizon_ = horizon; }

 private:
  ESConfig config_;
  ParamVector mean_;
  std::size_t horizon_;
};

}  // namespace nuemt
