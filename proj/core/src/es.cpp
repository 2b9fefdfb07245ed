#include "nuemt/es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nuemt/errors.hpp"

namespace nuemt {

void ESConfig::validate() const {
  require(step_size > 0.0 && std::isfinite(step_size), "ES step size must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "ES sigma must be positive");
  require(population >= 2 && population % 2 == 0, "ES population must be even and at least 2");
  require(weight_decay >= 0.0, "ES weight decay must be nonnegative");
}

std::vector<double> rank_utilities(std::span<const double> fitness) {
  const std::size_t n = fitness.size();
  require(n >= 1, "rank_utilities needs at least one fitness value");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

  const double top = std::log(static_cast<double>(n) / 2.0 + 1.0);
  std::vector<double> raw(n);
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    raw[k - 1] = std::max(0.0, top - std::log(static_cast<double>(k)));
    total += raw[k - 1];
  }
  std::vector<double> utilities(n);
  for (std::size_t k = 0; k < n; ++k) utilities[order[k]] = raw[k] / total;
  return utilities;
}

std::vector<double> mean_centered(std::span<const double> values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - mean;
  return out;
}

AscentStep ascent_step(const ParamVector& center, std::span<const ParamVector> points,
                       std::span<const double> coeffs, double scale, double step, double decay) {
  require(points.size() == coeffs.size(), "ascent_step: points and coefficients differ in count");
  const std::size_t n = center.size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const ParamVector& p = points[k];
    const double c = coeffs[k];
    for (std::size_t i = 0; i < n; ++i) acc[i] += c * (p[i] - center[i]);
  }
  AscentStep out;
  out.gradient.resize(n);
  out.mean.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.gradient[i] = scale * acc[i] - decay * center[i];
    out.mean[i] = center[i] + step * out.gradient[i];
  }
  return out;
}

RunningNormalizer evaluate_records(std::span<SampleRecord> records, const MixtureState& mix,
                                   std::size_t task, std::size_t horizon,
                                   const Evaluator& evaluator,
                                   const RunningNormalizer& normalizer) {
  const auto jobs = make_jobs(records, task, horizon);
  const BatchContext ctx{evaluator.problem, evaluator.noise, mix.means, mix.sigma, normalizer};
  const auto results = evaluator.engine.evaluate_batch(jobs, ctx);
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!std::isfinite(results[k].fitness)) {
      throw RuntimeFailure("non-finite fitness " + std::to_string(results[k].fitness) +
                           " for sample " + std::to_string(records[k].index) + " of task " +
                           std::to_string(task) + " (component " +
                           std::to_string(records[k].component) + ", offset " +
                           std::to_string(records[k].noise_offset) + ", sign " +
                           std::to_string(records[k].sign) + ")");
    }
    records[k].fitness = results[k].fitness;
    records[k].timesteps = results[k].timesteps;
  }
  return merge_observations(results, evaluator.problem.observation_dim());
}

std::vector<double> shape_fitness(std::span<SampleRecord> records, Shaping shaping) {
  std::vector<double> fitness(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) fitness[k] = records[k].fitness;
  if (shaping == Shaping::raw) {
    for (auto& r : records) r.utility = r.fitness;
    return fitness;
  }
  const auto u = rank_utilities(fitness);
  for (std::size_t k = 0; k < records.size(); ++k) records[k].utility = u[k];
  return mean_centered(u);
}

ESStep es_iteration(const ParamVector& mean, const ESConfig& config, const Evaluator& evaluator,
                    const RunningNormalizer& normalizer, std::uint64_t iteration_seed,
                    std::size_t horizon, std::size_t task) {
  config.validate();
  require(mean.size() == evaluator.problem.dimension(),
          "ES mean has " + std::to_string(mean.size()) + " entries, problem expects " +
              std::to_string(evaluator.problem.dimension()));

  const MixtureState mix{{mean}, config.sigma, {1.0}};
  ESStep out;
  out.records = sample_population(mix, config.population, evaluator.noise, iteration_seed, task);
  out.observations =
      evaluate_records(out.records, mix, task, horizon, evaluator, normalizer);

  double total = 0.0;
  for (const auto& r : out.records) {
    total += r.fitness;
    out.timesteps += r.timesteps;
  }
  out.mean_fitness = total / static_cast<double>(out.records.size());

  const auto coeffs = shape_fitness(out.records, config.shaping);
  std::vector<ParamVector> points;
  points.reserve(out.records.size());
  for (const auto& r : out.records) points.push_back(reconstruct(mix, evaluator.noise, r));

  const double scale =
      1.0 / (static_cast<double>(out.records.size()) * config.sigma * config.sigma);
  auto step = ascent_step(mean, points, coeffs, scale, config.step_size, config.weight_decay);
  out.mean = std::move(step.mean);
  out.gradient = std::move(step.gradient);
  return out;
}

OpenAIES::OpenAIES(ESConfig config, std::size_t dimension, std::size_t horizon)
    : OpenAIES(config, ParamVector(dimension, 0.0), horizon) {}

OpenAIES::OpenAIES(ESConfig config, ParamVector initial_mean, std::size_t horizon)
    : config_(config), mean_(std::move(initial_mean)), horizon_(horizon) {
  config_.validate();
  require(horizon_ >= 1, "ES horizon must be positive");
}

IterationOutcome OpenAIES::step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                                std::uint64_t seed) {
  ESStep s = es_iteration(mean_, config_, evaluator, normalizer, seed, horizon_);
  mean_ = std::move(s.mean);
  IterationOutcome out;
  out.timesteps = s.timesteps;
  out.horizons = {horizon_};
  out.task_mean_returns = {s.mean_fitness};
  out.target_coefficients = {1.0};
  out.allocations = {config_.population};
  out.observations = std::move(s.observations);
  return out;
}

}  // namespace nuemt
