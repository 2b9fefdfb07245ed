#include "nuemt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "nuemt/environment.hpp"
#include "nuemt/errors.hpp"
#include "nuemt/es.hpp"
#include "nuemt/eval_engine.hpp"
#include "nuemt/pel.hpp"
#include "nuemt/problem.hpp"
#include "nuemt/random.hpp"

namespace nuemt {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvaluationStream = 0xE7A1;

std::unique_ptr<Optimizer> make_optimizer(const ExperimentConfig& c, std::size_t dim) {
  switch (c.algorithm) {
    case Algorithm::nuemt:
      return std::make_unique<NuEMT>(nuemt_config(c), dim);
    case Algorithm::openai_es:
      return std::make_unique<OpenAIES>(es_config(c), dim, c.horizon);
    case Algorithm::pel: {
      PELConfig p;
      p.es = es_config(c);
      p.stages = c.tasks;
      p.full_horizon = c.horizon;
      p.budget = c.budget;
      return std::make_unique<PEL>(p, dim);
    }
  }
  throw ContractViolation("unhandled algorithm");
}

double target_return(const Problem& problem, const ParamVector& theta, std::size_t task,
                     std::size_t horizon, std::size_t episodes, const RunningNormalizer& norm) {
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    total += problem.evaluate(theta, EvalRequest{task, horizon, evaluation_seed(e)}, norm).fitness;
  }
  return total / static_cast<double>(episodes);
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

// Seeds of all logs in a run directory, ascending.
std::vector<std::pair<std::uint64_t, fs::path>> find_logs(const fs::path& dir) {
  static const std::regex pattern(R"(log_seed(\d+)\.csv)");
  std::vector<std::pair<std::uint64_t, fs::path>> logs;
  if (!fs::is_directory(dir)) return logs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
      logs.emplace_back(std::stoull(m[1].str()), entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  return logs;
}

// Piecewise-linear interpolation of y(t), clamped at both ends.
double interpolate(const std::vector<double>& t, const std::vector<double>& y, double x) {
  if (x <= t.front()) return y.front();
  if (x >= t.back()) return y.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
  const std::size_t lo = hi - 1;
  return y[lo] + (y[hi] - y[lo]) * (x - t[lo]) / (t[hi] - t[lo]);
}

}  // namespace

std::uint64_t evaluation_seed(std::size_t episode) {
  return derive_seed(kEvaluationStream, {static_cast<std::uint64_t>(episode)});
}

EvaluationReport evaluate_policy(const Checkpoint& checkpoint, std::size_t episodes,
                                 std::size_t horizon, std::optional<std::string> env_id) {
  if (episodes == 0) throw ConfigError("episodes", "must be at least 1");
  const std::string id = env_id.value_or(checkpoint.env_id);
  auto env = make_environment(id);
  const EnvSpec& spec = env->spec();
  if (spec.obs_dim != checkpoint.policy.obs_dim) {
    throw ConfigError("obs_dim", "environment '" + id + "' has obs_dim " +
                                     std::to_string(spec.obs_dim) + ", checkpoint expects " +
                                     std::to_string(checkpoint.policy.obs_dim));
  }
  if (spec.action_dim != checkpoint.policy.action_dim) {
    throw ConfigError("action_dim", "environment '" + id + "' has action_dim " +
                                        std::to_string(spec.action_dim) +
                                        ", checkpoint expects " +
                                        std::to_string(checkpoint.policy.action_dim));
  }
  const std::size_t h = horizon == 0 ? checkpoint.horizon : horizon;
  if (h < 1 || h > spec.max_horizon) {
    throw ConfigError("horizon", "must lie in [1, " + std::to_string(spec.max_horizon) + "]");
  }
  PolicyNetwork net(checkpoint.policy);
  EvaluationReport report;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto r = rollout(*env, net, checkpoint.params, h, evaluation_seed(e),
                           checkpoint.normalizer, false);
    report.returns.push_back(r.episode.total_return);
  }
  report.mean_return = mean_std(report.returns).mean;
  return report;
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const NoiseTable& noise, std::size_t workers,
                         const std::function<void(const RunLogRow&)>& progress) {
  config.validate();
  PolicyProblem problem(config.env_id, config.hidden_sizes);
  if (noise.size() <= problem.dimension()) {
    throw ConfigError("noise_table_size", "noise table is smaller than the parameter count");
  }
  EvalEngine engine(workers == 0 ? default_worker_count() : workers);
  const Evaluator evaluator{problem, noise, engine};
  auto optimizer = make_optimizer(config, problem.dimension());

  RunResult result;
  result.seed = seed;
  RunningNormalizer normalizer(problem.observation_dim());
  drive(*optimizer, evaluator, config.budget, seed, normalizer,
        [&](const DriveRecord& rec, const RunningNormalizer& norm) {
          const IterationOutcome& o = rec.outcome;
          RunLogRow row;
          row.iteration = rec.iteration + 1;
          row.timesteps = rec.cumulative_timesteps;
          row.stage = o.stage;
          row.target_eval_return = target_return(problem, optimizer->target_mean(),
                                                 config.tasks - 1, config.horizon,
                                                 config.eval_episodes, norm);
          row.population_mean_return = o.task_mean_returns.back();
          row.horizons = o.horizons;
          row.task_mean_returns = o.task_mean_returns;
          row.mixture_coefficients = o.target_coefficients;
          row.allocations = o.allocations;
          if (progress) progress(row);
          result.rows.push_back(std::move(row));
        });

  result.checkpoint.env_id = config.env_id;
  result.checkpoint.horizon = config.horizon;
  result.checkpoint.policy = problem.policy();
  result.checkpoint.params = optimizer->target_mean();
  result.checkpoint.normalizer = normalizer;
  result.final_return = result.rows.back().target_eval_return;
  return result;
}

TrainSummary train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  const fs::path out = options.out.value_or(fs::path(config.output_dir));
  std::vector<std::uint64_t> seeds = config.seeds;
  if (options.seed) seeds = {*options.seed};
  const std::size_t workers = options.workers.value_or(config.workers);

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + out.string());

  ExperimentConfig resolved = config;
  resolved.seeds = seeds;
  resolved.output_dir = out.string();
  write_text(out / "config.json", serialize_config(resolved));

  const NoiseTable noise(config.noise_seed, config.noise_table_size);
  for (std::uint64_t seed : seeds) {
    const std::string tag = std::to_string(seed);
    RunResult run = run_experiment(config, seed, noise, workers, [&](const RunLogRow& row) {
      if (options.progress) options.progress(seed, row);
    });
    write_text(out / ("log_seed" + tag + ".csv"), format_run_log(run.rows));
    save_checkpoint(out / ("checkpoint_seed" + tag + ".json"), run.checkpoint);
  }

  // The summary covers every log in the directory, so seeds trained by
  // separate processes into the same directory are aggregated together.
  TrainSummary summary;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& [seed, path] : find_logs(out)) {
    const auto rows = read_run_log(path);
    if (rows.empty()) continue;
    summary.seeds.push_back(seed);
    summary.final_returns.push_back(rows.back().target_eval_return);
    runs.push_back({{"seed", seed},
                    {"final_timesteps", rows.back().timesteps},
                    {"final_return", rows.back().target_eval_return},
                    {"iterations", rows.back().iteration}});
  }
  const MeanStd ms = mean_std(summary.final_returns);
  summary.mean = ms.mean;
  summary.stddev = ms.stddev;

  nlohmann::ordered_json j;
  j["algorithm"] = std::string(algorithm_name(config.algorithm));
  j["env_id"] = config.env_id;
  j["K"] = config.tasks;
  j["H"] = config.horizon;
  j["budget"] = config.budget;
  j["final_return_mean"] = summary.mean;
  j["final_return_std"] = summary.stddev;
  j["runs"] = runs;
  write_text(out / "summary.json", j.dump(2) + "\n");
  return summary;
}

PlotDataFiles emit_plot_data(const std::vector<fs::path>& run_dirs, const fs::path& out,
                             std::size_t grid_points) {
  if (run_dirs.empty()) throw ConfigError("runs", "no run directories given");
  if (grid_points < 1) throw ConfigError("grid_points", "must be at least 1");

  struct RunSet {
    std::string label;
    ExperimentConfig config;
    std::vector<std::vector<RunLogRow>> logs;
  };
  std::vector<RunSet> sets;
  for (const auto& dir : run_dirs) {
    RunSet s;
    fs::path norm = dir.lexically_normal();
    s.label = norm.filename().string();
    if (s.label.empty()) s.label = norm.parent_path().filename().string();
    if (!fs::exists(dir / "config.json")) {
      throw ConfigError("runs", dir.string() + " has no config.json");
    }
    s.config = load_config(dir / "config.json");
    for (const auto& [seed, path] : find_logs(dir)) {
      auto rows = read_run_log(path);
      if (!rows.empty()) s.logs.push_back(std::move(rows));
    }
    if (s.logs.empty()) throw ConfigError("runs", dir.string() + " contains no run logs");
    if (!sets.empty() && s.config.env_id != sets.front().config.env_id) {
      throw ConfigError("env_id", "run directories mix environments '" +
                                      sets.front().config.env_id + "' and '" +
                                      s.config.env_id + "'");
    }
    sets.push_back(std::move(s));
  }

  // Common grid: the span every run covers.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& s : sets) {
    for (const auto& log : s.logs) {
      lo = std::max(lo, static_cast<double>(log.front().timesteps));
      hi = std::min(hi, static_cast<double>(log.back().timesteps));
    }
  }
  std::vector<double> grid;
  if (hi <= lo || grid_points == 1) {
    grid.push_back(lo);
  } else {
    for (std::size_t g = 0; g < grid_points; ++g) {
      grid.push_back(g + 1 == grid_points
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(g) /
                                    static_cast<double>(grid_points - 1));
    }
  }

  std::string returns = "run_set,algorithm,timesteps,mean_return,std_return,runs\n";
  std::string coeffs = "run_set,algorithm,timesteps,component,mean_coefficient,std_coefficient\n";
  for (const auto& s : sets) {
    const std::string prefix = s.label + "," + std::string(algorithm_name(s.config.algorithm)) + ",";
    std::vector<std::vector<double>> t(s.logs.size());
    for (std::size_t r = 0; r < s.logs.size(); ++r) {
      for (const auto& row : s.logs[r]) t[r].push_back(static_cast<double>(row.timesteps));
    }
    const std::size_t components = s.logs.front().back().mixture_coefficients.size();
    for (double x : grid) {
      std::vector<double> ys;
      for (std::size_t r = 0; r < s.logs.size(); ++r) {
        std::vector<double> y;
        for (const auto& row : s.logs[r]) y.push_back(row.target_eval_return);
        ys.push_back(interpolate(t[r], y, x));
      }
      const MeanStd ms = mean_std(ys);
      returns += prefix + format_number(x) + "," + format_number(ms.mean) + "," +
                 format_number(ms.stddev) + "," + std::to_string(ys.size()) + "\n";
      for (std::size_t c = 0; c < components; ++c) {
        std::vector<double> ws;
        for (std::size_t r = 0; r < s.logs.size(); ++r) {
          std::vector<double> y;
          for (const auto& row : s.logs[r]) {
            y.push_back(c < row.mixture_coefficients.size() ? row.mixture_coefficients[c]
                                                            : std::nan(""));
          }
          ws.push_back(interpolate(t[r], y, x));
        }
        const MeanStd cs = mean_std(ws);
        coeffs += prefix + format_number(x) + "," + std::to_string(c + 1) + "," +
                  format_number(cs.mean) + "," + format_number(cs.stddev) + "\n";
      }
    }
  }

  PlotDataFiles files;
  files.returns = out;
  files.coefficients =
      out.parent_path() / (out.stem().string() + "_coefficients" + out.extension().string());
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(files.returns, returns);
  write_text(files.coefficients, coeffs);
  return files;
}

}  // namespace nuemt
