// Command-line front end: train, evaluate and plot-data.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nuemt/checkpoint.hpp"
#include "nuemt/errors.hpp"
#include "nuemt/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeFailure = 2;

int run_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> workers, const std::string& out, bool quiet) {
  const nuemt::ExperimentConfig config = nuemt::load_config(config_path);
  nuemt::TrainOptions options;
  options.seed = seed;
  options.workers = workers;
  if (!out.empty()) options.out = out;
  if (!quiet) {
    options.progress = [](std::uint64_t s, const nuemt::RunLogRow& row) {
      if (row.iteration % 10 == 1) {
        std::cerr << "seed " << s << "  iter " << row.iteration << "  timesteps "
                  << row.timesteps << "  eval " << row.target_eval_return << '\n';
      }
    };
  }
  const auto summary = nuemt::train(config, options);
  std::cout << "final return over " << summary.seeds.size() << " run(s): " << summary.mean
            << " +/- " << summary.stddev << '\n';
  return kOk;
}

int run_evaluate(const std::string& checkpoint_path, std::size_t episodes, std::size_t horizon,
                 const std::string& env_id) {
  const nuemt::Checkpoint checkpoint = nuemt::load_checkpoint(checkpoint_path);
  std::optional<std::string> env;
  if (!env_id.empty()) env = env_id;
  const auto report = nuemt::evaluate_policy(checkpoint, episodes, horizon, env);
  for (std::size_t e = 0; e < report.returns.size(); ++e) {
    std::cout << "episode " << e << ": " << report.returns[e] << '\n';
  }
  std::cout << "mean return: " << report.mean_return << '\n';
  return kOk;
}

int run_plot_data(const std::vector<std::string>& runs, const std::string& out,
                  std::size_t points) {
  std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
  const auto files = nuemt::emit_plot_data(dirs, out, points);
  std::cout << "wrote " << files.returns.string() << " and " << files.coefficients.string()
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitask neuroevolution over progressively longer episodes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train one run per seed and write logs");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--seed", seed, "Run only this seed");
  train->add_option("--workers", workers, "Evaluation worker threads");
  train->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  train->add_flag("--quiet", quiet, "Suppress progress output");

  std::string checkpoint_path;
  std::size_t episodes = 1;
  std::size_t horizon = 0;
  std::string env_id;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  evaluate->add_option("--episodes", episodes, "Number of evaluation episodes")->required();
  evaluate->add_option("--horizon", horizon, "Episode length (default: checkpoint's)");
  evaluate->add_option("--env", env_id, "Environment id (default: checkpoint's)");

  std::vector<std::string> runs;
  std::string plot_out;
  std::size_t points = 101;
  auto* plot = app.add_subcommand("plot-data", "Aggregate run logs onto a common grid");
  plot->add_option("--runs", runs, "Run directories")->required()->expected(1, -1);
  plot->add_option("--out", plot_out, "Output CSV")->required();
  plot->add_option("--points", points, "Grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) return run_train(config_path, seed, workers, out_dir, quiet);
    if (*evaluate) return run_evaluate(checkpoint_path, episodes, horizon, env_id);
    if (*plot) return run_plot_data(runs, plot_out, points);
  } catch (const nuemt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kConfigError;
}
