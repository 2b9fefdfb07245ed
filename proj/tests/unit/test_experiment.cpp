#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nuemt/errors.hpp"
#include "nuemt/experiment.hpp"

namespace nuemt {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nuemt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig actuator_config() {
  ExperimentConfig c;
  c.env_id = "linear_actuator";
  c.tasks = 2;
  c.horizon = 20;
  c.total_population = 8;
  c.sigma = 0.1;
  c.budget = 1200;
  c.seeds = {3};
  c.hidden_sizes = {4};
  c.noise_table_size = 1 << 12;
  return c;
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, NonDefaultRoundTrip) {
  ExperimentConfig c = actuator_config();
  c.algorithm = Algorithm::pel;
  c.sigma = 0.1 + 1e-17;
  c.alpha = 1.0 / 3.0;
  c.beta = 0.07;
  c.trust_radius = 2.5;
  c.epsilon_self = 0.01;
  c.shaping = Shaping::raw;
  c.learn_coefficients = false;
  c.seeds = {0, 18446744073709551615ull, 7};
  c.workers = 3;
  c.output_dir = "out dir/with \"quotes\"";
  c.noise_seed = 12345678901234ull;
  c.eval_episodes = 4;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, UnknownKeyIsRejectedByName) {
  try {
    parse_config(R"({"env_id": "linear_actuator", "H": 10, "learning_rate": 0.1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "learning_rate");
  }
}

TEST(Config, OpenAIESForcesSingleTask) {
  const auto c = parse_config(R"({"algorithm": "openai_es", "K": 4})");
  EXPECT_EQ(c.tasks, 1u);
}

struct BadField {
  std::string json;
  std::string field;
};

void PrintTo(const BadField& bad, std::ostream* os) { *os << bad.json; }

class ConfigValidation : public ::testing::TestWithParam<BadField> {};

TEST_P(ConfigValidation, ErrorNamesTheOffendingField) {
  try {
    parse_config(GetParam().json);
    FAIL() << "accepted " << GetParam().json;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), GetParam().field) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Fields, ConfigValidation,
    ::testing::Values(BadField{R"({"algorithm": "sgd"})", "algorithm"},
                      BadField{R"({"env_id": "atari"})", "env_id"},
                      BadField{R"({"K": 0})", "K"},
                      BadField{R"({"K": -2})", "K"},
                      BadField{R"({"K": 1.5})", "K"},
                      BadField{R"({"K": 3, "H": 2, "env_id": "linear_actuator"})", "H"},
                      BadField{R"({"H": 5000})", "H"},
                      BadField{R"({"N_total": 7})", "N_total"},
                      BadField{R"({"N_total": 4, "K": 3})", "N_total"},
                      BadField{R"({"sigma": 0})", "sigma"},
                      BadField{R"({"sigma": "big"})", "sigma"},
                      BadField{R"({"alpha": -1})", "alpha"},
                      BadField{R"({"beta": 0})", "beta"},
                      BadField{R"({"r": 0})", "r"},
                      BadField{R"({"weight_decay": -0.1})", "weight_decay"},
                      BadField{R"({"epsilon_self": 0.9, "K": 2})", "epsilon_self"},
                      BadField{R"({"shaping": "fancy"})", "shaping"},
                      BadField{R"({"learn_coefficients": 1})", "learn_coefficients"},
                      BadField{R"({"budget": 0})", "budget"},
                      BadField{R"({"seeds": []})", "seeds"},
                      BadField{R"({"seeds": [1, 1]})", "seeds"},
                      BadField{R"({"seeds": 4})", "seeds"},
                      BadField{R"({"output_dir": ""})", "output_dir"},
                      BadField{R"({"hidden_sizes": [64, 0]})", "hidden_sizes"},
                      BadField{R"({"noise_table_size": 100})", "noise_table_size"},
                      BadField{R"({"eval_episodes": 0})", "eval_episodes"},
                      BadField{R"([1, 2])", "config"},
                      BadField{R"({"K": )", "config"}),
    [](const ::testing::TestParamInfo<BadField>& info) {
      return std::to_string(info.index) + "_" + info.param.field;
    });

TEST(RunLog, FormatParseRoundTrip) {
  std::vector<RunLogRow> rows(2);
  rows[0] = {1, 100, 1, -3.5, -4.25, {5, 10}, {-1.0, 0.1}, {0.4, 0.6}, {4, 4}};
  rows[1] = {2, 250, 2, 1.0 / 3.0, std::nan(""), {10}, {std::nan("")}, {1.0}, {8}};
  const auto back = parse_run_log(format_run_log(rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], rows[0]);
  EXPECT_EQ(back[1].target_eval_return, rows[1].target_eval_return);
  EXPECT_TRUE(std::isnan(back[1].population_mean_return));
  EXPECT_EQ(format_run_log(back), format_run_log(rows));
}

TEST(RunLog, HeaderIsTheDocumentedContract) {
  EXPECT_EQ(run_log_header(),
            "iteration,timesteps,stage,target_eval_return,population_mean_return,horizons,"
            "task_mean_returns,mixture_coefficients,allocations");
}

TEST(RunLog, RejectsNonIncreasingTimesteps) {
  const std::string csv = run_log_header() + "\n1,10,0,0,0,1,0,1,2\n2,10,0,0,0,1,0,1,2\n";
  EXPECT_THROW(parse_run_log(csv), ConfigError);
}

TEST(RunExperiment, BudgetBelowOneIterationLogsExactlyOneRow) {
  ExperimentConfig c = actuator_config();
  c.budget = 1;
  const NoiseTable noise(c.noise_seed, c.noise_table_size);
  const auto run = run_experiment(c, 0, noise, 1);
  ASSERT_EQ(run.rows.size(), 1u);
  EXPECT_EQ(run.rows[0].iteration, 1u);
}

TEST(RunExperiment, TimestepsStrictlyIncreaseAndBudgetIsMet) {
  const ExperimentConfig c = actuator_config();
  const NoiseTable noise(c.noise_seed, c.noise_table_size);
  const auto run = run_experiment(c, 1, noise, 1);
  for (std::size_t i = 1; i < run.rows.size(); ++i) {
    EXPECT_GT(run.rows[i].timesteps, run.rows[i - 1].timesteps);
  }
  EXPECT_GE(run.rows.back().timesteps, c.budget);
  EXPECT_LT(run.rows[run.rows.size() - 2].timesteps, c.budget);
}

TEST(RunExperiment, TwoTaskHorizonsAreLogged) {
  ExperimentConfig c;
  c.env_id = "corridor_dash";
  c.tasks = 2;
  c.horizon = 1000;
  c.total_population = 4;
  c.budget = 1;
  c.hidden_sizes = {4};
  c.noise_table_size = 1 << 12;
  const NoiseTable noise(c.noise_seed, c.noise_table_size);
  const auto run = run_experiment(c, 0, noise, 1);
  EXPECT_EQ(run.rows.front().horizons, (std::vector<std::size_t>{500, 1000}));
}

TEST(RunExperiment, FinalLoggedReturnEqualsCheckpointEvaluation) {
  const ExperimentConfig c = actuator_config();
  const NoiseTable noise(c.noise_seed, c.noise_table_size);
  const auto run = run_experiment(c, 2, noise, 1);
  EXPECT_EQ(evaluate_policy(run.checkpoint, c.eval_episodes).mean_return, run.final_return);
}

TEST(Train, SameSeedTwiceGivesByteIdenticalCsv) {
  const ExperimentConfig c = actuator_config();
  const fs::path a = scratch("train_a"), b = scratch("train_b");
  TrainOptions oa, ob;
  oa.out = a;
  ob.out = b;
  ob.workers = 4;
  train(c, oa);
  train(c, ob);
  EXPECT_EQ(slurp(a / "log_seed3.csv"), slurp(b / "log_seed3.csv"));
  EXPECT_FALSE(slurp(a / "log_seed3.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Train, SummaryIsRecomputableFromCsvRows) {
  ExperimentConfig c = actuator_config();
  c.seeds = {0, 1, 2};
  const fs::path out = scratch("summary");
  TrainOptions o;
  o.out = out;
  const auto summary = train(c, o);
  ASSERT_EQ(summary.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  std::vector<double> finals;
  for (std::uint64_t s : summary.seeds) {
    finals.push_back(read_run_log(out / ("log_seed" + std::to_string(s) + ".csv")).back().target_eval_return);
  }
  const double mean = (finals[0] + finals[1] + finals[2]) / 3.0;
  double ss = 0.0;
  for (double f : finals) ss += (f - mean) * (f - mean);
  EXPECT_DOUBLE_EQ(summary.mean, mean);
  EXPECT_DOUBLE_EQ(summary.stddev, std::sqrt(ss / 3.0));
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_DOUBLE_EQ(j.at("final_return_mean").get<double>(), mean);
  EXPECT_TRUE(fs::exists(out / "checkpoint_seed1.json"));
  EXPECT_EQ(load_config(out / "config.json").seeds, c.seeds);
  fs::remove_all(out);
}

TEST(Evaluate, ZeroCheckpointOnActuatorReturnsMinusThree) {
  Checkpoint ck;
  ck.env_id = "linear_actuator";
  ck.horizon = 3;
  ck.policy = policy_for(environment_spec("linear_actuator"), {64, 64});
  ck.params.assign(parameter_count(ck.policy), 0.0);
  ck.normalizer = RunningNormalizer(1);
  const auto r = evaluate_policy(ck, 2);
  EXPECT_EQ(r.mean_return, -3.0);
  EXPECT_EQ(r.returns, (std::vector<double>{-3.0, -3.0}));
  EXPECT_EQ(evaluate_policy(ck, 2).returns, r.returns);
}

TEST(Evaluate, RejectsZeroEpisodesAndDimensionMismatch) {
  Checkpoint ck;
  ck.env_id = "linear_actuator";
  ck.horizon = 3;
  ck.policy = policy_for(environment_spec("linear_actuator"), {4});
  ck.params.assign(parameter_count(ck.policy), 0.0);
  ck.normalizer = RunningNormalizer(1);
  EXPECT_THROW(evaluate_policy(ck, 0), ConfigError);
  try {
    evaluate_policy(ck, 1, 0, std::string("pendulum_swingup"));
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("3"), std::string::npos);
    EXPECT_NE(msg.find("1"), std::string::npos);
    EXPECT_EQ(e.field(), "obs_dim");
  }
}

class PlotData : public ::testing::Test {
 protected:
  void SetUp() override { root_ = scratch("plot"); }
  void TearDown() override { fs::remove_all(root_); }

  fs::path train_into(const std::string& name, ExperimentConfig c) {
    TrainOptions o;
    o.out = root_ / name;
    train(c, o);
    return root_ / name;
  }

  std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    return rows;
  }

  fs::path root_;
};

TEST_F(PlotData, SingleRunHasZeroStd) {
  const auto dir = train_into("single", actuator_config());
  const auto files = emit_plot_data({dir}, root_ / "plot.csv", 11);
  const auto rows = read_csv(files.returns);
  ASSERT_EQ(rows.size(), 11u);
  for (const auto& r : rows) EXPECT_EQ(std::stod(r[4]), 0.0);
}

TEST_F(PlotData, TwoIdenticalRunsAverageToEither) {
  ExperimentConfig c = actuator_config();
  const auto dir = train_into("twins", c);
  fs::copy_file(dir / "log_seed3.csv", dir / "log_seed4.csv");
  const auto rows = read_csv(emit_plot_data({dir}, root_ / "twins.csv", 7).returns);
  const auto log = read_run_log(dir / "log_seed3.csv");
  ASSERT_EQ(rows.size(), 7u);
  // First and last grid points sit on logged rows.
  EXPECT_EQ(std::stod(rows.front()[3]), log.front().target_eval_return);
  EXPECT_EQ(std::stod(rows.back()[3]), log.back().target_eval_return);
  for (const auto& r : rows) {
    EXPECT_EQ(std::stod(r[4]), 0.0);
    EXPECT_EQ(r[5], "2");
  }
}

TEST_F(PlotData, SingleTaskCoefficientIsConstantOne) {
  ExperimentConfig c = actuator_config();
  c.algorithm = Algorithm::openai_es;
  c.tasks = 1;
  const auto dir = train_into("es", c);
  const auto rows = read_csv(emit_plot_data({dir}, root_ / "es.csv", 5).coefficients);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_EQ(r[3], "1");
    EXPECT_EQ(std::stod(r[4]), 1.0);
    EXPECT_EQ(std::stod(r[5]), 0.0);
  }
}

TEST_F(PlotData, MismatchedEnvironmentsAreRejected) {
  const auto a = train_into("a", actuator_config());
  ExperimentConfig other = actuator_config();
  other.env_id = "pendulum_swingup";
  other.budget = 100;
  other.horizon = 5;
  const auto b = train_into("b", other);
  try {
    emit_plot_data({a, b}, root_ / "mix.csv");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "env_id");
  }
}

TEST_F(PlotData, MultipleAlgorithmsShareOneGrid) {
  ExperimentConfig n = actuator_config();
  ExperimentConfig p = actuator_config();
  p.algorithm = Algorithm::pel;
  const auto a = train_into("nuemt", n);
  const auto b = train_into("pel", p);
  const auto rows = read_csv(emit_plot_data({a, b}, root_ / "both.csv", 9).returns);
  ASSERT_EQ(rows.size(), 18u);
  for (std::size_t g = 0; g < 9; ++g) {
    EXPECT_EQ(rows[g][0], "nuemt");
    EXPECT_EQ(rows[9 + g][0], "pel");
    EXPECT_EQ(rows[g][2], rows[9 + g][2]);
  }
}

}  // namespace
}  // namespace nuemt
