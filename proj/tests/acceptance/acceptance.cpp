// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.
//
//   nuemt_acceptance [--only N]... [--skip N]... [--pilot]
//
// --pilot runs the OpenAI-ES calibration run for criterion 7 and prints the
// threshold it implies; the value used by the suite is frozen below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "nuemt/es.hpp"
#include "nuemt/experiment.hpp"
#include "nuemt/nuemt.hpp"
#include "nuemt/pel.hpp"

namespace {

using namespace nuemt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

ExperimentConfig shipped_config(const std::string& name) {
  return load_config(fs::path(NUEMT_CONFIG_DIR) / (name + ".json"));
}

// 1. Monte Carlo ES gradient on the sphere against the analytic -2*theta.
Verdict gradient_oracle() {
  const auto start = Clock::now();
  constexpr std::size_t kDim = 20;
  testing::Bench bench(testing::sphere_problem({ParamVector(kDim, 0.0)}), 1 << 22);
  ESConfig cfg;
  cfg.sigma = 0.1;
  cfg.population = 10'000;
  cfg.weight_decay = 0.0;
  cfg.shaping = Shaping::raw;
  ParamVector theta(kDim, 0.0);
  theta[0] = 1.0;
  int within = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto step = es_iteration(theta, cfg, bench.evaluator(), bench.fresh_normalizer(),
                                   derive_seed(0xAC1, {seed}), 1);
    const double rel = std::abs(step.gradient[0] - (-2.0)) / 2.0;
    worst = std::max(worst, rel);
    if (rel < 0.05) ++within;
  }
  const double elapsed = seconds_since(start);
  return {within >= 18 && elapsed < 10.0,
          std::to_string(within) + "/20 seeds within 5% (worst " + fmt(100 * worst, 3) +
              "%), " + fmt(elapsed, 3) + " s"};
}

// 2. The density-ratio weighted mixture estimate of E_{p_i}[F] against
// direct sampling from p_i.
Verdict importance_sampling() {
  constexpr std::size_t kDim = 5;
  constexpr std::size_t kSamples = 100'000;
  MixtureState mix;
  mix.sigma = 0.5;
  mix.means = {ParamVector{0.0, 0.0, 0.0, 0.0, 0.0}, ParamVector{0.6, -0.3, 0.2, 0.0, 0.4}};
  mix.weights = {0.3, 0.7};
  const ParamVector c{0.5, 0.5, -0.5, 0.25, 0.0};
  const auto F = [&](std::span<const double> x) {
    return std::cos(x[0] + 2.0 * x[1]) - 0.5 * sq_dist(x, c) + std::tanh(x[4]);
  };
  const NoiseTable table(0x15, 1 << 22);
  const auto records = sample_population(mix, kSamples, table, 7, 1);

  std::string detail;
  bool pass = true;
  for (std::size_t i = 0; i < 2; ++i) {
    // Mirrored pairs are dependent, so the standard error is taken over pairs.
    std::vector<double> pair_means;
    for (std::size_t k = 0; k + 1 < records.size(); k += 2) {
      double s = 0.0;
      for (std::size_t m = k; m < k + 2; ++m) {
        const ParamVector theta = reconstruct(mix, table, records[m]);
        s += F(theta) * density_ratio(i, theta, mix);
      }
      pair_means.push_back(s / 2.0);
    }
    Rng rng(derive_seed(0xAC2, {i}));
    std::vector<double> direct;
    ParamVector theta(kDim);
    for (std::size_t k = 0; k < kSamples; ++k) {
      for (std::size_t d = 0; d < kDim; ++d) theta[d] = mix.means[i][d] + mix.sigma * rng.normal();
      direct.push_back(F(theta));
    }
    const auto stats = [](const std::vector<double>& v) {
      const double n = static_cast<double>(v.size());
      const double m = sum(v) / n;
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair{m, std::sqrt(ss / (n - 1) / n)};
    };
    const auto [m_is, se_is] = stats(pair_means);
    const auto [m_direct, se_direct] = stats(direct);
    const double se = std::hypot(se_is, se_direct);
    const double z = std::abs(m_is - m_direct) / se;
    pass = pass && z < 3.0;
    detail += (i ? "; " : "") + std::string("p") + std::to_string(i + 1) + ": IS " +
              fmt(m_is, 5) + " vs direct " + fmt(m_direct, 5) + " (" + fmt(z, 2) + " SE)";
  }
  return {pass, detail};
}

// 3. K=1 NuEMT and K=1 PEL against OpenAI-ES, and the pure-self update.
Verdict reductions() {
  int mismatches = 0;
  std::size_t compared = 0;
  const auto policy_bench = [] {
    return testing::Bench(
        std::make_unique<PolicyProblem>("linear_actuator", std::vector<std::size_t>{8}), 1 << 14);
  };
  const auto sphere_bench = [] {
    return testing::Bench(testing::sphere_problem({ParamVector{0.5, -1.0, 0.25, 2.0},
                                                   ParamVector{-0.5, 1.0, 0.0, 1.0}}),
                          1 << 14);
  };
  for (int which = 0; which < 2; ++which) {
    auto bench = which == 0 ? policy_bench() : sphere_bench();
    const std::size_t horizon = which == 0 ? 30 : 1;
    const std::size_t dim = bench.problem->dimension();
    ESConfig es;
    es.sigma = 0.05;
    es.population = 16;
    NuEMTConfig nc;
    nc.tasks = 1;
    nc.total_population = es.population;
    nc.full_horizon = horizon;
    nc.sigma = es.sigma;
    nc.step_size = es.step_size;
    nc.weight_decay = es.weight_decay;
    PELConfig pc;
    pc.es = es;
    pc.stages = 1;
    pc.full_horizon = horizon;
    pc.budget = 1'000'000;

    OpenAIES ref(es, dim, horizon);
    NuEMT multi(nc, dim);
    PEL pel(pc, dim);
    RunningNormalizer n_ref = bench.fresh_normalizer(), n_multi = n_ref, n_pel = n_ref;
    for (std::uint64_t it = 0; it < 30; ++it) {
      const auto a = ref.step(bench.evaluator(), n_ref, it);
      const auto b = multi.step(bench.evaluator(), n_multi, it);
      const auto c = pel.step(bench.evaluator(), n_pel, it);
      mismatches += ref.target_mean() != multi.target_mean();
      mismatches += ref.target_mean() != pel.target_mean();
      mismatches += a.timesteps != b.timesteps || a.timesteps != c.timesteps;
      compared += 3;
      n_ref.merge(a.observations);
      n_multi.merge(b.observations);
      n_pel.merge(c.observations);
    }
  }

  // Target coefficients pinned at [0, 1]: the target's update must be the
  // single-task update with the whole population.
  {
    auto bench = sphere_bench();
    NuEMTConfig cfg;
    cfg.tasks = 2;
    cfg.total_population = 16;
    cfg.full_horizon = 2;
    cfg.sigma = 0.1;
    cfg.learn_coefficients = false;
    MultitaskState s = initial_state(cfg, 4);
    s.coefficients[1] = {0.0, 1.0};
    s.populations = allocate_populations(s.coefficients[1], cfg.total_population, cfg.tasks);
    s.means[0] = ParamVector{0.3, -0.2, 0.1, 0.0};
    s.means[1] = ParamVector{-0.4, 0.6, 0.2, 0.5};
    ESConfig es;
    es.sigma = cfg.sigma;
    es.population = cfg.total_population;
    es.step_size = cfg.step_size;
    es.weight_decay = cfg.weight_decay;
    for (std::uint64_t it = 0; it < 30; ++it) {
      const auto next = nuemt_iteration(s, cfg, bench.evaluator(), bench.fresh_normalizer(), it);
      const auto single = es_iteration(s.means[1], es, bench.evaluator(),
                                       bench.fresh_normalizer(), it, s.horizons[1], 1);
      mismatches += next.state.means[1] != single.mean;
      ++compared;
      s = next.state;
    }
  }
  return {mismatches == 0, std::to_string(compared - mismatches) + "/" +
                               std::to_string(compared) + " bitwise-equal comparisons"};
}

// 4. Simplex invariants over fuzzed multitask runs and fuzzed single steps.
Verdict simplex_safety() {
  double worst_sum = 0.0, worst_plane = 0.0;
  bool ok = true;
  std::size_t checked = 0;
  const auto check = [&](const std::vector<double>& w, double floor) {
    worst_sum = std::max(worst_sum, std::abs(sum(w) - 1.0));
    ok = ok && std::abs(sum(w) - 1.0) <= 1e-9 && w.back() >= floor;
    for (double x : w) ok = ok && x >= 0.0;
    ++checked;
  };
  const auto check_plane = [&](const std::vector<double>& b, double beta) {
    const double s = std::abs(sum(project_to_plane(b, beta)));
    worst_plane = std::max(worst_plane, s);
    ok = ok && s <= 1e-12;
  };

  Rng rng(0xAC4);
  for (int run = 0; run < 4; ++run) {
    NuEMTConfig cfg;
    cfg.tasks = 2 + rng.index(3);
    cfg.total_population = 8 * cfg.tasks;
    cfg.full_horizon = cfg.tasks;
    cfg.sigma = rng.uniform(0.02, 0.5);
    cfg.mixture_step_size = std::pow(10.0, rng.uniform(-2.0, 0.5));
    cfg.self_floor = rng.uniform(1e-3, 0.5 / static_cast<double>(cfg.tasks));
    std::vector<ParamVector> optima;
    for (std::size_t i = 0; i < cfg.tasks; ++i) optima.push_back(testing::random_vector(rng, 6));
    testing::Bench bench(testing::sphere_problem(optima), 1 << 14, 1, 500 + run);
    NuEMT opt(cfg, 6);
    for (std::uint64_t it = 0; it < 1000; ++it) {
      opt.step(bench.evaluator(), bench.fresh_normalizer(), it);
      const auto& state = opt.state();
      for (std::size_t i = 0; i < cfg.tasks; ++i) {
        check(state.coefficients[i], i == 0 ? 0.0 : cfg.self_floor);
      }
    }
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    const double floor = rng.uniform(0.0, 1.0 / static_cast<double>(n));
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 20; ++it) {
      std::vector<double> b(n);
      for (auto& x : b) x = rng.normal() * std::pow(10.0, rng.uniform(-3.0, 1.0));
      const double beta = std::pow(10.0, rng.uniform(-3.0, 0.5));
      check_plane(b, beta);
      w = simplex_step(w, b, beta, floor);
      check(w, floor);
    }
  }
  return {ok, std::to_string(checked) + " coefficient vectors, max |sum-1| " + fmt(worst_sum, 3) +
                  ", max |sum d| " + fmt(worst_plane, 3)};
}

// 5. Distinct staged-sphere optima with near-converged means: the target's
// self coefficient must rise monotonically to 0.99.
Verdict coefficient_convergence() {
  constexpr std::size_t kDim = 5;
  constexpr std::size_t kSteps = 500;
  int converged = 0;
  std::size_t slowest = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(0xAC5, {seed}));
    NuEMTConfig cfg;
    cfg.tasks = 2;
    cfg.total_population = 32;
    cfg.full_horizon = 2;
    cfg.sigma = 0.1;
    cfg.mixture_step_size = 0.2;
    const std::vector<ParamVector> optima{testing::random_vector(rng, kDim),
                                          testing::random_vector(rng, kDim)};
    testing::Bench bench(testing::sphere_problem(optima), 1 << 14, 1, seed);
    MultitaskState state = initial_state(cfg, kDim);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t d = 0; d < kDim; ++d) {
        state.means[i][d] = optima[i][d] + 0.5 * cfg.sigma * rng.normal();
      }
    }
    NuEMT opt(cfg, state);
    double previous = opt.state().coefficients[1][1];
    bool monotone = true;
    std::size_t reached = 0;
    for (std::size_t step = 1; step <= kSteps && reached == 0; ++step) {
      opt.step(bench.evaluator(), bench.fresh_normalizer(), step);
      const double self = opt.state().coefficients[1][1];
      monotone = monotone && self >= previous;
      previous = self;
      if (self >= 0.99) reached = step;
    }
    if (monotone && reached > 0) {
      ++converged;
      slowest = std::max(slowest, reached);
    }
  }
  return {converged == 20, std::to_string(converged) + "/20 seeds monotone to w_self >= 0.99" +
                               (converged ? ", slowest in " + std::to_string(slowest) + " steps"
                                          : std::string())};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 6. The shipped linear_actuator config trained with 1, 2 and 8 workers.
Verdict determinism() {
  const auto start = Clock::now();
  const ExperimentConfig config = shipped_config("linear_actuator");
  const fs::path root = fs::temp_directory_path() / "nuemt_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> logs;
  for (std::size_t workers : {1, 2, 8}) {
    TrainOptions options;
    options.workers = workers;
    options.out = root / ("w" + std::to_string(workers));
    train(config, options);
    logs.push_back(read_file(*options.out / ("log_seed" + std::to_string(config.seeds[0]) + ".csv")));
  }
  fs::remove_all(root);
  const double elapsed = seconds_since(start);
  const bool same = !logs[0].empty() && logs[0] == logs[1] && logs[0] == logs[2];
  return {same && elapsed < 60.0, std::string(same ? "identical" : "DIFFERENT") + " logs (" +
                                      std::to_string(logs[0].size()) + " bytes), " +
                                      fmt(elapsed, 3) + " s"};
}

// 7. Corridor transfer and the cross-environment comparison with PEL.

// Frozen from `nuemt_acceptance --pilot`: half the pilot OpenAI-ES run's final
// evaluation return on the shipped corridor config (seed 1000).
constexpr double kCorridorThreshold = 2.2476;
constexpr std::uint64_t kPilotSeed = 1000;

ExperimentConfig as_algorithm(ExperimentConfig c, Algorithm a) {
  c.algorithm = a;
  if (a == Algorithm::openai_es) c.tasks = 1;
  c.validate();
  return c;
}

std::vector<RunResult> run_seeds(const ExperimentConfig& config, const NoiseTable& noise) {
  std::vector<RunResult> runs;
  for (std::uint64_t seed : config.seeds) {
    const auto start = Clock::now();
    runs.push_back(run_experiment(config, seed, noise, config.workers));
    std::cerr << "  " << config.env_id << " " << algorithm_name(config.algorithm) << " seed "
              << seed << ": final " << runs.back().final_return << " (" << fmt(seconds_since(start), 3)
              << " s)\n";
  }
  return runs;
}

double median_final(const std::vector<RunResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.final_return);
  return testing::median(v);
}

double median_time_to(const std::vector<RunResult>& runs, double threshold) {
  std::vector<double> v;
  for (const auto& r : runs) {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
      if (row.target_eval_return >= threshold) {
        t = static_cast<double>(row.timesteps);
        break;
      }
    }
    v.push_back(t);
  }
  return testing::median(v);
}

double pilot_threshold() {
  const ExperimentConfig es = as_algorithm(shipped_config("corridor_dash"), Algorithm::openai_es);
  const NoiseTable noise(es.noise_seed, es.noise_table_size);
  const auto run = run_experiment(es, kPilotSeed, noise, es.workers);
  return 0.5 * run.final_return;
}

Verdict transfer() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;

  const ExperimentConfig corridor = shipped_config("corridor_dash");
  int wins = 0;
  for (const char* env : {"corridor_dash", "pendulum_swingup", "cartpole_swingup"}) {
    const ExperimentConfig base = shipped_config(env);
    const NoiseTable noise(base.noise_seed, base.noise_table_size);
    const auto nuemt_runs = run_seeds(as_algorithm(base, Algorithm::nuemt), noise);
    const auto pel_runs = run_seeds(as_algorithm(base, Algorithm::pel), noise);
    if (base.env_id == corridor.env_id) {
      const auto es_runs = run_seeds(as_algorithm(base, Algorithm::openai_es), noise);
      const double t_nuemt = median_time_to(nuemt_runs, kCorridorThreshold);
      const double t_es = median_time_to(es_runs, kCorridorThreshold);
      pass = pass && t_nuemt <= t_es && std::isfinite(t_nuemt);
      detail += "corridor median timesteps to " + fmt(kCorridorThreshold) + ": NuEMT " +
                fmt(t_nuemt, 7) + " vs ES " + fmt(t_es, 7) + "; ";
    }
    const double f_nuemt = median_final(nuemt_runs);
    const double f_pel = median_final(pel_runs);
    wins += f_nuemt >= f_pel;
    detail += std::string(env) + " final " + fmt(f_nuemt) + " vs PEL " + fmt(f_pel) + "; ";
  }
  pass = pass && wins >= 2;
  detail += std::to_string(wins) + "/3 environments, " + fmt(seconds_since(start) / 60.0, 3) +
            " min";
  return {pass, detail};
}

// 8. rank_utilities against a direct transcription of the log-rank formula.
Verdict utilities() {
  double worst = 0.0;
  bool ok = true;
  Rng rng(0xAC8);
  for (std::size_t n : {1, 2, 4, 64, 128}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> f(n);
      for (auto& x : f) x = trial % 2 ? std::round(3.0 * rng.normal()) : rng.normal();
      std::vector<double> oracle(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t rank = 1;
        for (std::size_t j = 0; j < n; ++j) rank += f[j] > f[i] || (f[j] == f[i] && j < i);
        oracle[i] = std::max(0.0, std::log(n / 2.0 + 1.0) - std::log(static_cast<double>(rank)));
      }
      const double total = sum(oracle);
      for (auto& x : oracle) x /= total;
      const auto u = rank_utilities(f);
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(u[i] - oracle[i]));
      ok = ok && std::abs(sum(u) - 1.0) <= 1e-12;

      // Permuting distinct fitness values permutes the utilities.
      if (trial % 2 == 0) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = f[perm[i]];
        const auto v = rank_utilities(g);
        for (std::size_t i = 0; i < n; ++i) ok = ok && v[i] == u[perm[i]];
      }
    }
  }
  ok = ok && worst <= 1e-12;
  return {ok, "max deviation " + fmt(worst, 3)};
}

// 9. Distance after projection is min(r, d) in sigma units.
Verdict projection() {
  Rng rng(0xAC9);
  double worst = 0.0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    const double sigma = std::pow(10.0, rng.uniform(-2.0, 0.0));
    const double radius = rng.uniform(0.1, 3.0);
    const ParamVector centre = testing::random_vector(rng, n);
    ParamVector theta = centre;
    const double scale = sigma * rng.uniform(0.0, 6.0) / std::sqrt(static_cast<double>(n));
    for (auto& x : theta) x += scale * rng.normal();
    const double d = std::sqrt(sq_dist(theta, centre)) / sigma;
    const auto out = mahalanobis_project(theta, centre, sigma, radius);
    const double d_out = std::sqrt(sq_dist(out, centre)) / sigma;
    worst = std::max(worst, std::abs(d_out - std::min(radius, d)));
  }
  const auto fixed = mahalanobis_project(std::vector<double>{3.0, 4.0},
                                         std::vector<double>{0.0, 0.0}, 1.0, 1.0);
  const bool exact = fixed == ParamVector{0.6, 0.8};
  return {worst <= 1e-12 && exact, "max deviation " + fmt(worst, 3) + " over 10^4 inputs; [3,4] -> [" +
                                       fmt(fixed[0], 17) + ", " + fmt(fixed[1], 17) + "]"};
}

// 10. Per-iteration cost at uniform allocation.
Verdict cost_ordering() {
  bool ok = true;
  std::string detail;
  for (std::size_t k : {2, 3, 4}) {
    NuEMTConfig cfg;
    cfg.tasks = k;
    cfg.total_population = 64;
    cfg.full_horizon = 200;
    testing::Bench bench(
        std::make_unique<PolicyProblem>("linear_actuator", std::vector<std::size_t>{16}), 1 << 16);
    const NuEMT opt(cfg, bench.problem->dimension());
    const MultitaskState& s = opt.state();
    const auto step = nuemt_iteration(s, cfg, bench.evaluator(), bench.fresh_normalizer(), 1);
    std::uint64_t predicted = 0;
    for (std::size_t i = 0; i < k; ++i) predicted += s.populations[i] * s.horizons[i];
    const std::uint64_t full = cfg.total_population * cfg.full_horizon;
    ok = ok && step.timesteps == predicted && step.timesteps < full;
    detail += "K=" + std::to_string(k) + ": " + std::to_string(step.timesteps) + " (sum N_i*H_i " +
              std::to_string(predicted) + ", N*H " + std::to_string(full) + ") ";
  }
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, skip;
  bool pilot = false;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if ((arg == "--only" || arg == "--skip") && a + 1 < argc) {
      (arg == "--only" ? only : skip).insert(std::atoi(argv[++a]));
    } else if (arg == "--pilot") {
      pilot = true;
    } else {
      std::cerr << "usage: nuemt_acceptance [--only N]... [--skip N]... [--pilot]\n";
      return 2;
    }
  }
  if (pilot) {
    std::cout << "corridor threshold: " << fmt(pilot_threshold(), 6) << '\n';
    return 0;
  }

  const std::vector<Criterion> criteria{
      {1, "gradient oracle", gradient_oracle},
      {2, "importance sampling", importance_sampling},
      {3, "reduction identities", reductions},
      {4, "simplex safety", simplex_safety},
      {5, "coefficient convergence", coefficient_convergence},
      {6, "determinism", determinism},
      {7, "transfer benefit", transfer},
      {8, "utilities", utilities},
      {9, "projection geometry", projection},
      {10, "cost ordering", cost_ordering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if ((!only.empty() && !only.count(c.id)) || skip.count(c.id)) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << "AC" << c.id << " " << c.name << ": "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
