#include "nuemt/eval_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "nuemt/errors.hpp"

namespace nuemt {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("NUEMT_WORKERS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) return static_cast<std::size_t>(parsed);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

EvalEngine::EvalEngine(std::size_t workers) : workers_(workers) {
  require(workers_ >= 1, "evaluation engine needs at least one worker");
}

namespace {

struct Outcome {
  std::optional<EvalResult> result;
  std::string error;
};

Outcome run_job(const EvalJob& job, const BatchContext& ctx, std::vector<double>& theta) {
  Outcome out;
  // One retry, then give up on this job.
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      require(job.component < ctx.means.size(), "job references an unknown component");
      reconstruct(ctx.means[job.component], ctx.sigma, ctx.noise, job.noise_offset, job.sign,
                  theta);
      Evaluation e = ctx.problem.evaluate(theta, {job.task, job.horizon, job.episode_seed},
                                          ctx.normalizer);
      out.result = EvalResult{job.sample_index, e.fitness, e.timesteps, std::move(e.observations)};
      out.error.clear();
      return out;
    } catch (const std::exception& ex) {
      out.error = ex.what();
    }
  }
  return out;
}

}  // namespace

std::vector<EvalResult> EvalEngine::evaluate_batch(std::span<const EvalJob> jobs,
                                                   const BatchContext& context) const {
  std::vector<Outcome> outcomes(jobs.size());
  const std::size_t dim = context.means.empty() ? 0 : context.means.front().size();

  auto work = [&](std::atomic<std::size_t>& next) {
    std::vector<double> theta(dim);
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      outcomes[i] = run_job(jobs[i], context, theta);
    }
  };

  std::atomic<std::size_t> next{0};
  const std::size_t threads = std::min(workers_, jobs.size());
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back([&] { work(next); });
  }

  std::vector<EvalResult> results;
  results.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcomes[i].result) {
      throw RuntimeFailure("evaluation of sample " + std::to_string(jobs[i].sample_index) +
                           " (task " + std::to_string(jobs[i].task) + ", component " +
                           std::to_string(jobs[i].component) + ", offset " +
                           std::to_string(jobs[i].noise_offset) + ", sign " +
                           std::to_string(jobs[i].sign) + ") failed twice: " +
                           outcomes[i].error);
    }
    results.push_back(std::move(*outcomes[i].result));
  }
  std::stable_sort(results.begin(), results.end(), [](const EvalResult& a, const EvalResult& b) {
    return a.sample_index < b.sample_index;
  });
  return results;
}

std::vector<EvalJob> make_jobs(std::span<const SampleRecord> records, std::size_t task,
                               std::size_t horizon) {
  std::vector<EvalJob> jobs;
  jobs.reserve(records.size());
  for (const auto& r : records) {
    jobs.push_back(
        EvalJob{r.index, task, r.component, r.noise_offset, r.sign, horizon, r.episode_seed});
  }
  return jobs;
}

RunningNormalizer merge_observations(std::span<const EvalResult> results, std::size_t dim) {
  RunningNormalizer merged(dim);
  for (const auto& r : results) merged.merge(r.observations);
  return merged;
}

}  // namespace nuemt
