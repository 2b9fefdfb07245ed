#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nuemt/policy.hpp"
#include "nuemt/problem.hpp"
#include "nuemt/sampling.hpp"

namespace nuemt {

// One evaluation, described by indices only. Workers rebuild the parameter
// vector from the shared noise table and the broadcast means.
struct EvalJob {
  std::size_t sample_index = 0;
  std::size_t task = 0;
  std::size_t component = 0;
  std::size_t noise_offset = 0;
  int sign = 1;
  std::size_t horizon = 1;
  std::uint64_t episode_seed = 0;
};

struct EvalResult {
  std::size_t sample_index = 0;
  double fitness = 0.0;
  std::size_t timesteps = 0;
  RunningNormalizer observations;
};

// Everything a worker may read during a batch; all of it is frozen for the
// duration of the batch.
struct BatchContext {
  const Problem& problem;
  const NoiseTable& noise;
  std::span<const ParamVector> means;  // indexed by EvalJob::component
  double sigma;
  const RunningNormalizer& normalizer;
};

// Reads NUEMT_WORKERS if set, else the hardware concurrency (at least 1).
std::size_t default_worker_count();

class EvalEngine {
 public:
  explicit EvalEngine(std::size_t workers = default_worker_count());

  std::size_t workers() const noexcept { return workers_; }

  // Evaluates every job and returns results sorted by sample index. Fitness
  // values are bit-identical for any worker count. A job that throws is
  // retried once; a second failure aborts the batch with RuntimeFailure.
  std::vector<EvalResult> evaluate_batch(std::span<const EvalJob> jobs,
                                         const BatchContext& context) const;

 private:
  std::size_t workers_;
};

// Builds jobs for sampled records of one task.
std::vector<EvalJob> make_jobs(std::span<const SampleRecord> records, std::size_t task,
                               std::size_t horizon);

// Merges per-result observation statistics in sample-index order.
RunningNormalizer merge_observations(std::span<const EvalResult> results, std::size_t dim);

}  // namespace nuemt
