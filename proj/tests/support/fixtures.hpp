#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "nuemt/eval_engine.hpp"
#include "nuemt/optimizer.hpp"
#include "nuemt/problem.hpp"
#include "nuemt/random.hpp"
#include "nuemt/sampling.hpp"

namespace nuemt::testing {

// Problem, noise table and engine bundled so tests can build an Evaluator in
// one line. The evaluator refers into the bundle, so keep the bundle alive.
struct Bench {
  std::unique_ptr<Problem> problem;
  NoiseTable noise;
  EvalEngine engine;

  Bench(std::unique_ptr<Problem> p, std::size_t table_size, std::size_t workers = 1,
        std::uint64_t noise_seed = 99)
      : problem(std::move(p)), noise(noise_seed, table_size), engine(workers) {}

  Evaluator evaluator() const { return Evaluator{*problem, noise, engine}; }
  RunningNormalizer fresh_normalizer() const {
    return RunningNormalizer(problem->observation_dim());
  }
};

inline std::unique_ptr<Problem> sphere_problem(std::vector<ParamVector> optima) {
  return std::make_unique<SyntheticProblem>(SyntheticFitness(std::move(optima)));
}

inline ParamVector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  ParamVector v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace nuemt::testing
