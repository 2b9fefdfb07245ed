#include <benchmark/benchmark.h>

#include <vector>

#include "nuemt/environment.hpp"
#include "nuemt/es.hpp"
#include "nuemt/eval_engine.hpp"
#include "nuemt/nuemt.hpp"
#include "nuemt/policy.hpp"
#include "nuemt/problem.hpp"
#include "nuemt/random.hpp"
#include "nuemt/sampling.hpp"

namespace {

using namespace nuemt;

std::vector<double> random_params(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

void BM_PolicyForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const PolicySpec spec = policy_for(environment_spec("corridor_dash"), {hidden, hidden});
  PolicyNetwork net(spec);
  const auto params = random_params(parameter_count(spec), 1);
  const std::vector<double> obs{0.5, 0.1, -0.2, 2.0, 0.3, -0.1};
  const RunningNormalizer norm(spec.obs_dim);
  for (auto _ : state) benchmark::DoNotOptimize(net.act(params, obs, norm).data());
}
BENCHMARK(BM_PolicyForward)->Arg(16)->Arg(64)->Arg(256);

void BM_Rollout(benchmark::State& state, const char* env_id) {
  const auto horizon = static_cast<std::size_t>(state.range(0));
  auto env = make_environment(env_id);
  PolicyNetwork net(policy_for(env->spec()));
  const auto params = random_params(net.parameter_count(), 2);
  const RunningNormalizer norm(env->spec().obs_dim);
  std::uint64_t steps = 0;
  for (auto _ : state) {
    const auto r = rollout(*env, net, params, horizon, 3, norm, false);
    steps += r.episode.timesteps_used;
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Rollout, corridor, "corridor_dash")->Arg(600);
BENCHMARK_CAPTURE(BM_Rollout, pendulum, "pendulum_swingup")->Arg(1000);
BENCHMARK_CAPTURE(BM_Rollout, cartpole, "cartpole_swingup")->Arg(1000);

void BM_DensityRatios(benchmark::State& state) {
  const auto components = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 4738;  // corridor policy with two 64-unit layers
  MixtureState mix;
  mix.sigma = 0.02;
  for (std::size_t j = 0; j < components; ++j) mix.means.push_back(random_params(dim, 10 + j));
  mix.weights.assign(components, 1.0 / static_cast<double>(components));
  const auto theta = random_params(dim, 99);
  for (auto _ : state) benchmark::DoNotOptimize(density_ratios(theta, mix).data());
}
BENCHMARK(BM_DensityRatios)->Arg(1)->Arg(3)->Arg(5);

void BM_RankUtilities(benchmark::State& state) {
  const auto fitness = random_params(static_cast<std::size_t>(state.range(0)), 5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rank_utilities(fitness).data());
}
BENCHMARK(BM_RankUtilities)->Arg(64)->Arg(1024);

void BM_EvalBatch(benchmark::State& state) {
  const auto workers = static_cast<std::size_t>(state.range(0));
  const PolicyProblem problem("pendulum_swingup", {32, 32});
  const NoiseTable noise(7, 1 << 20);
  const std::vector<ParamVector> means{ParamVector(problem.dimension(), 0.0)};
  const RunningNormalizer norm(problem.observation_dim());
  MixtureState mix{means, 0.02, {1.0}};
  const auto records = sample_population(mix, 64, noise, 1, 0);
  const auto jobs = make_jobs(records, 0, 200);
  const EvalEngine engine(workers);
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.evaluate_batch(jobs, BatchContext{problem, noise, means, 0.02, norm}).data());
  }
}
BENCHMARK(BM_EvalBatch)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_NuEMTIteration(benchmark::State& state) {
  NuEMTConfig cfg;
  cfg.tasks = static_cast<std::size_t>(state.range(0));
  cfg.total_population = 64;
  cfg.full_horizon = 200;
  const PolicyProblem problem("pendulum_swingup", {32, 32});
  const NoiseTable noise(7, 1 << 20);
  const EvalEngine engine(1);
  const Evaluator ev{problem, noise, engine};
  const RunningNormalizer norm(problem.observation_dim());
  MultitaskState s = initial_state(cfg, problem.dimension());
  std::uint64_t seed = 0;
  for (auto _ : state) s = nuemt_iteration(s, cfg, ev, norm, ++seed).state;
}
BENCHMARK(BM_NuEMTIteration)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
