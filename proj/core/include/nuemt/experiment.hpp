#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nuemt/checkpoint.hpp"
#include "nuemt/nuemt.hpp"
#include "nuemt/optimizer.hpp"
#include "nuemt/sampling.hpp"

namespace nuemt {

enum class Algorithm { nuemt, openai_es, pel };

std::string_view algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);  // ConfigError("algorithm") if unknown

// A training experiment. The JSON schema is documented in docs/formats.md;
// keys match the member names below except where noted.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::nuemt;
  std::string env_id = "corridor_dash";
  std::size_t tasks = 2;                // "K"; forced to 1 for openai_es
  std::size_t horizon = 1000;           // "H"
  std::size_t total_population = 64;    // "N_total"
  double sigma = 0.02;
  double alpha = 0.05;
  double beta = 0.05;
  double trust_radius = 1.0;            // "r"
  double weight_decay = 0.005;
  double epsilon_self = 1e-3;
  Shaping shaping = Shaping::ranked;
  bool learn_coefficients = true;
  std::uint64_t budget = 1'000'000;     // timesteps
  std::vector<std::uint64_t> seeds{0};
  std::size_t workers = 0;              // 0: default_worker_count()
  std::string output_dir = "runs";
  std::vector<std::size_t> hidden_sizes{64, 64};
  std::size_t noise_table_size = NoiseTable::kDefaultLength;
  std::uint64_t noise_seed = 0x5EED;
  std::size_t eval_episodes = 1;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Keys absent from the text keep their defaults; unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

NuEMTConfig nuemt_config(const ExperimentConfig& config);
ESConfig es_config(const ExperimentConfig& config);

// Fixed evaluation seeds shared by training-time progress points and the
// evaluate command.
std::uint64_t evaluation_seed(std::size_t episode);

// One CSV row per iteration. Column order is a stable contract:
//   iteration,timesteps,stage,target_eval_return,population_mean_return,
//   horizons,task_mean_returns,mixture_coefficients,allocations
// List-valued columns are ';'-joined. population_mean_return is the mean
// training fitness of the target task's samples; target_eval_return is the
// return of the target mean itself over the fixed evaluation seeds.
struct RunLogRow {
  std::uint64_t iteration = 0;
  std::uint64_t timesteps = 0;  // cumulative
  std::size_t stage = 0;
  double target_eval_return = 0.0;
  double population_mean_return = 0.0;
  std::vector<std::size_t> horizons;
  std::vector<double> task_mean_returns;
  std::vector<double> mixture_coefficients;  // target task's w_K
  std::vector<std::size_t> allocations;

  bool operator==(const RunLogRow&) const = default;
};

std::string run_log_header();
std::string format_run_log_row(const RunLogRow& row);
std::string format_run_log(const std::vector<RunLogRow>& rows);
std::vector<RunLogRow> parse_run_log(std::string_view csv);
std::vector<RunLogRow> read_run_log(const std::filesystem::path& path);

struct EvaluationReport {
  double mean_return = 0.0;
  std::vector<double> returns;
};

// Runs the policy deterministically on evaluation_seed(0..episodes-1).
// horizon 0 means the checkpoint's horizon.
EvaluationReport evaluate_policy(const Checkpoint& checkpoint, std::size_t episodes,
                                 std::size_t horizon = 0,
                                 std::optional<std::string> env_id = std::nullopt);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<RunLogRow> rows;
  Checkpoint checkpoint;
  double final_return = 0.0;  // target_eval_return of the last row
};

// A single training run held in memory. `progress` is called after every
// logged row.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const NoiseTable& noise, std::size_t workers,
                         const std::function<void(const RunLogRow&)>& progress = {});

struct TrainOptions {
  std::optional<std::uint64_t> seed;  // overrides config.seeds
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> out;
  std::function<void(std::uint64_t seed, const RunLogRow&)> progress;
};

struct TrainSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_returns;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

// Writes, per seed, log_seed<s>.csv and checkpoint_seed<s>.json, plus the
// resolved config.json and summary.json into the output directory. The
// summary aggregates every log_seed*.csv present in that directory.
TrainSummary train(const ExperimentConfig& config, const TrainOptions& options = {});

// Aligns the runs found in each directory onto a common timestep grid and
// writes `<out>` (returns) and `<out stem>_coefficients<ext>` (w_K paths).
struct PlotDataFiles {
  std::filesystem::path returns;
  std::filesystem::path coefficients;
};
PlotDataFiles emit_plot_data(const std::vector<std::filesystem::path>& run_dirs,
                             const std::filesystem::path& out, std::size_t grid_points = 101);

}  // namespace nuemt
