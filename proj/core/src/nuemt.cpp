#include "nuemt/nuemt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "nuemt/errors.hpp"

namespace nuemt {

void NuEMTConfig::validate() const {
  require(tasks >= 1, "NuEMT needs at least one task");
  require(total_population % 2 == 0 && total_population >= 2 * tasks,
          "NuEMT total population must be even and at least 2K");
  require(full_horizon >= tasks, "NuEMT full horizon must be at least K");
  require(sigma > 0.0 && std::isfinite(sigma), "NuEMT sigma must be positive");
  require(step_size > 0.0 && std::isfinite(step_size), "NuEMT step size must be positive");
  require(mixture_step_size > 0.0 && std::isfinite(mixture_step_size),
          "NuEMT mixture step size must be positive");
  require(trust_radius > 0.0, "NuEMT trust radius must be positive");
  require(self_floor > 0.0 && self_floor <= 1.0 / static_cast<double>(tasks),
          "NuEMT self floor must lie in (0, 1/K]");
  require(weight_decay >= 0.0, "NuEMT weight decay must be nonnegative");
}

std::vector<std::size_t> task_horizons(std::size_t tasks, std::size_t full_horizon) {
  require(tasks >= 1 && full_horizon >= tasks, "task_horizons needs 1 <= K <= H");
  std::vector<std::size_t> horizons(tasks);
  for (std::size_t i = 1; i <= tasks; ++i) {
    horizons[i - 1] = (i * full_horizon + tasks / 2) / tasks;
  }
  return horizons;
}

void MultitaskState::validate(const NuEMTConfig& config) const {
  const std::size_t k = config.tasks;
  require(means.size() == k && coefficients.size() == k && horizons.size() == k &&
              populations.size() == k,
          "multitask state does not have K tasks");
  for (std::size_t i = 0; i < k; ++i) {
    const auto& w = coefficients[i];
    require(w.size() == i + 1, "task coefficient vector has the wrong length");
    double sum = 0.0;
    for (double v : w) {
      require(v >= 0.0, "mixture coefficient is negative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "mixture coefficients do not sum to one");
    require(w.back() >= config.self_floor * (1.0 - 1e-9), "self coefficient below its floor");
    require(populations[i] % 2 == 0, "task population is odd");
    if (i > 0) require(horizons[i] > horizons[i - 1], "task horizons are not increasing");
  }
  require(horizons.back() == config.full_horizon, "target horizon differs from H");
  require(std::accumulate(populations.begin(), populations.end(), std::size_t{0}) ==
              config.total_population,
          "task populations do not sum to N_total");
  require(populations.back() * k >= config.total_population,
          "target population below N_total/K");
}

MultitaskState initial_state(const NuEMTConfig& config, std::size_t dimension) {
  config.validate();
  const std::size_t k = config.tasks;
  MultitaskState s;
  s.means.assign(k, ParamVector(dimension, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    s.coefficients.emplace_back(i + 1, 1.0 / static_cast<double>(i + 1));
  }
  s.horizons = task_horizons(k, config.full_horizon);
  s.populations = allocate_populations(s.coefficients.back(), config.total_population, k);
  return s;
}

MixtureState task_mixture(const MultitaskState& state, std::size_t task, double sigma) {
  require(task < state.means.size(), "task index out of range");
  MixtureState mix;
  mix.means.assign(state.means.begin(), state.means.begin() + static_cast<long>(task) + 1);
  mix.sigma = sigma;
  mix.weights = state.coefficients[task];
  return mix;
}

std::vector<double> coefficient_gradient(std::span<const SampleRecord> records,
                                         const MixtureState& mix, const NoiseTable& noise) {
  std::vector<double> b(mix.components(), 0.0);
  if (records.empty()) return b;
  for (const auto& r : records) {
    const ParamVector theta = reconstruct(mix, noise, r);
    const auto ratios = density_ratios(theta, mix);
    for (std::size_t j = 0; j < b.size(); ++j) b[j] += r.utility * ratios[j];
  }
  const double inv_n = 1.0 / static_cast<double>(records.size());
  for (auto& v : b) v *= inv_n;
  return b;
}

std::vector<double> project_to_plane(std::span<const double> b, double beta) {
  const double mean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  std::vector<double> d(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) d[j] = beta * (b[j] - mean);
  return d;
}

std::vector<double> simplex_step(std::span<const double> w, std::span<const double> b,
                                 double beta, double self_floor) {
  const std::size_t n = w.size();
  require(n >= 1 && b.size() == n, "simplex_step: coefficient and gradient lengths differ");
  require(std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); }),
          "simplex_step: non-finite gradient");
  std::vector<double> floor(n, 0.0);
  floor.back() = self_floor;

  // Active set: drop coordinates stuck at their floor that the projected
  // direction would push further down, then re-project over the rest.
  std::vector<bool> free(n, true);
  std::vector<double> d(n, 0.0);
  for (;;) {
    std::vector<double> sub_b;
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) sub_b.push_back(b[j]);
    const auto sub_d = project_to_plane(sub_b, beta);
    std::size_t at = 0;
    for (std::size_t j = 0; j < n; ++j) d[j] = free[j] ? sub_d[at++] : 0.0;

    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (free[j] && d[j] < 0.0 && w[j] <= floor[j]) {
        free[j] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }

  double lambda = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (d[j] < 0.0) lambda = std::min(lambda, (w[j] - floor[j]) / -d[j]);
  }
  lambda = std::max(lambda, 0.0);

  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = w[j] + lambda * d[j];
    // The binding coordinate lands exactly on its floor.
    if (d[j] < 0.0 && out[j] < floor[j]) out[j] = floor[j];
    if (d[j] < 0.0 && (w[j] - floor[j]) / -d[j] == lambda) out[j] = floor[j];
  }
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& v : out) v /= sum;
  }
  return out;
}

std::vector<std::size_t> allocate_populations(std::span<const double> target_coefficients,
                                              std::size_t total_population, std::size_t tasks) {
  require(tasks >= 1 && target_coefficients.size() == tasks,
          "allocate_populations: coefficient vector must have K entries");
  require(total_population % 2 == 0 && total_population >= 2 * tasks,
          "allocate_populations: N_total must be even and at least 2K");
  const std::size_t pairs = total_population / 2;
  const std::size_t min_target_pairs = (pairs + tasks - 1) / tasks;
  const double raw_target_pairs = static_cast<double>(pairs) * target_coefficients.back();
  const auto rounded = static_cast<std::size_t>(std::floor(raw_target_pairs + 0.5));
  const std::size_t target_pairs = std::min(pairs, std::max(rounded, min_target_pairs));

  std::vector<std::size_t> alloc(tasks, 0);
  alloc.back() = 2 * target_pairs;
  const std::size_t remaining = total_population - alloc.back();
  if (tasks == 1 || remaining == 0) {
    alloc.back() += remaining;
    return alloc;
  }
  const auto aux = target_coefficients.first(tasks - 1);
  const double aux_sum = std::accumulate(aux.begin(), aux.end(), 0.0);
  if (aux_sum <= 0.0) {
    alloc.back() += remaining;
    return alloc;
  }
  const auto split = stratified_counts(aux, remaining);
  std::copy(split.begin(), split.end(), alloc.begin());
  return alloc;
}

namespace {

std::string dump_records(std::size_t task, std::span<const SampleRecord> records) {
  std::ostringstream os;
  os << "task " << task << " records (index component offset sign fitness utility):\n";
  for (const auto& r : records) {
    os << "  " << r.index << ' ' << r.component << ' ' << r.noise_offset << ' ' << r.sign << ' '
       << r.fitness << ' ' << r.utility << '\n';
  }
  return os.str();
}

}  // namespace

NuEMTStep nuemt_iteration(const MultitaskState& state, const NuEMTConfig& config,
                          const Evaluator& evaluator, const RunningNormalizer& normalizer,
                          std::uint64_t iteration_seed) {
  config.validate();
  state.validate(config);
  const std::size_t k = config.tasks;
  const std::size_t dim = evaluator.problem.dimension();
  for (const auto& m : state.means) {
    require(m.size() == dim, "task mean dimension differs from the problem dimension");
  }

  NuEMTStep out;
  out.state = state;
  out.observations = RunningNormalizer(evaluator.problem.observation_dim());
  out.tasks.resize(k);

  for (std::size_t i = 0; i < k; ++i) {
    TaskReport& report = out.tasks[i];
    report.population = out.state.populations[i];
    if (report.population == 0) {
      // Frozen this iteration; still a mixture component for later tasks.
      report.mean_fitness = std::numeric_limits<double>::quiet_NaN();
      continue;
    }

    const MixtureState mix = task_mixture(out.state, i, config.sigma);
    auto records = sample_population(mix, report.population, evaluator.noise, iteration_seed, i);
    const RunningNormalizer seen =
        evaluate_records(records, mix, i, out.state.horizons[i], evaluator, normalizer);
    out.observations.merge(seen);

    double total = 0.0;
    for (const auto& r : records) {
      total += r.fitness;
      report.timesteps += r.timesteps;
    }
    report.mean_fitness = total / static_cast<double>(records.size());

    const auto shaped = shape_fitness(records, config.shaping);
    const std::size_t self = mix.self_component();
    const ParamVector& centre = mix.means[self];

    std::vector<ParamVector> points;
    std::vector<double> coeffs(records.size());
    points.reserve(records.size());
    // The centring baseline cancels across a mirrored pair only when both
    // points straddle the centre. Projected foreign pairs land on the same
    // side, so they keep their uncentred utilities.
    for (std::size_t s = 0; s < records.size(); ++s) {
      ParamVector theta = reconstruct(mix, evaluator.noise, records[s]);
      double weight = shaped[s];
      if (records[s].component != self) {
        theta = mahalanobis_project(theta, centre, config.sigma, config.trust_radius);
        weight = records[s].utility;
      }
      coeffs[s] = weight * density_ratio(self, theta, mix);
      points.push_back(std::move(theta));
    }

    const double w_self = mix.weights[self];
    const double scale =
        w_self / (static_cast<double>(records.size()) * config.sigma * config.sigma);
    AscentStep ascent =
        ascent_step(centre, points, coeffs, scale, config.step_size, config.weight_decay);
    report.coefficient_gradient = coefficient_gradient(records, mix, evaluator.noise);

    if (!all_finite(ascent.gradient) || !all_finite(report.coefficient_gradient)) {
      throw RuntimeFailure("non-finite NuEMT gradient; " + dump_records(i, records));
    }

    out.state.means[i] = std::move(ascent.mean);
    report.mean_gradient = std::move(ascent.gradient);
    if (config.learn_coefficients) {
      out.state.coefficients[i] = simplex_step(out.state.coefficients[i],
                                               report.coefficient_gradient,
                                               config.mixture_step_size, config.self_floor);
    }
    report.records = std::move(records);
    out.timesteps += report.timesteps;
  }

  out.state.populations =
      allocate_populations(out.state.coefficients.back(), config.total_population, k);
  out.state.timesteps += out.timesteps;
  return out;
}

NuEMT::NuEMT(NuEMTConfig config, std::size_t dimension)
    : config_(config), state_(initial_state(config_, dimension)) {}

NuEMT::NuEMT(NuEMTConfig config, MultitaskState state)
    : config_(config), state_(std::move(state)) {
  config_.validate();
  state_.validate(config_);
}

IterationOutcome NuEMT::step(const Evaluator& evaluator, const RunningNormalizer& normalizer,
                             std::uint64_t seed) {
  // Logged allocations are the ones this iteration actually used.
  IterationOutcome out;
  out.allocations = state_.populations;
  NuEMTStep s = nuemt_iteration(state_, config_, evaluator, normalizer, seed);
  state_ = std::move(s.state);
  out.timesteps = s.timesteps;
  out.horizons = state_.horizons;
  for (const auto& t : s.tasks) out.task_mean_returns.push_back(t.mean_fitness);
  out.target_coefficients = state_.coefficients.back();
  out.observations = std::move(s.observations);
  return out;
}

}  // namespace nuemt
