// bessrl command-line front end: train / evaluate / oracle / synth.
// Exit codes: 0 success, 1 config error, 2 data error, 3 training failure.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bessrl/checkpoint.hpp"
#include "bessrl/dp_oracle.hpp"
#include "bessrl/experiment.hpp"

namespace {

using namespace bessrl;

struct TrainArgs {
  std::string config_path;
  std::vector<int> cases;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
};

struct EvaluateArgs {
  std::string checkpoint_path;
  std::string data_path;
  std::string config_path;
  double price_max = 0.0;
  std::string trajectory_out;
};

struct OracleArgs {
  std::string data_path;
  std::string config_path;
  int soc_grid = 41;
  int action_grid = 21;
};

struct SynthArgs {
  int length = 2000;
  std::uint64_t seed = 7;
  std::string out_path;
  SynthParams params;
};

BatteryParams battery_from_optional_config(const std::string& config_path) {
  if (config_path.empty()) return BatteryParams{};
  return parse_config_file(config_path).battery;
}

int run_train(const TrainArgs& args) {
  ExperimentConfig cfg = parse_config_file(args.config_path);
  if (!args.cases.empty()) {
    cfg.cases.clear();
    for (int c : args.cases) {
      if (c < 1 || c > 3) throw ConfigError("--case must be 1, 2, or 3");
      cfg.cases.push_back(static_cast<CaseId>(c));
    }
  }
  if (!args.seeds.empty()) cfg.seeds = args.seeds;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;

  std::vector<RunResult> results = run_experiment(cfg);
  std::cout << format_report_table(results);
  std::cout << "outputs written to " << cfg.out_dir << "\n";

  bool any_failed = false;
  for (const RunResult& run : results)
    if (run.failed) {
      any_failed = true;
      std::cerr << "run " << case_name(run.case_id) << " seed " << run.seed
                << " failed: " << run.fail_reason << "\n";
    }
  return any_failed ? 3 : 0;
}

int run_evaluate(const EvaluateArgs& args) {
  NetworkParams params = load_checkpoint(args.checkpoint_path);
  PriceSeries series = load_csv(args.data_path);
  if (args.price_max > 0.0) series.price_max = args.price_max;
  if (!(series.price_max > 0.0))
    throw DataError("evaluate: series maximum price is not positive; pass --price-max");
  BatteryParams battery = battery_from_optional_config(args.config_path);

  Segment segment{0, series.size()};
  EvalResult ev = evaluate_policy(params, series, segment, battery);
  std::printf("steps                     %d\n", ev.steps);
  std::printf("charging cost (avg USD)   %.6f\n", ev.charging_cost_avg_usd());
  std::printf("discharge revenue (avg)   %.6f\n", ev.discharging_revenue_avg_usd());
  std::printf("degradation cost (avg)    %.6f\n", ev.degradation_cost_avg_usd());
  std::printf("total profit (avg USD)    %.6f\n", ev.total_profit_avg_usd());
  std::printf("total profit (USD)        %.6f\n", ev.total_profit_usd);

  if (!args.trajectory_out.empty()) {
    std::FILE* f = std::fopen(args.trajectory_out.c_str(), "w");
    if (!f) throw DataError("cannot write " + args.trajectory_out);
    std::fprintf(f, "t,price_usd,soc,mu,a_eff,clamped,step_profit_usd\n");
    for (const TrajectoryRow& row : ev.trajectory)
      std::fprintf(f, "%ld,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", row.t, row.price_usd, row.soc,
                   row.mu, row.a_eff, row.clamped ? 1 : 0, row.step_profit_usd);
    std::fclose(f);
    std::cout << "trajectory written to " << args.trajectory_out << "\n";
  }
  return 0;
}

int run_oracle(const OracleArgs& args) {
  PriceSeries series = load_csv(args.data_path);
  BatteryParams battery = battery_from_optional_config(args.config_path);
  Segment segment{0, series.size()};
  DpOracleResult result = dp_oracle(series, segment, battery, args.soc_grid, args.action_grid);
  std::printf("optimal profit (USD)      %.6f\n", result.optimal_profit_usd);
  std::printf("greedy replay profit      %.6f\n", result.replay_profit_usd);
  std::printf("steps                     %zu\n", result.actions.size());
  return 0;
}

int run_synth(const SynthArgs& args) {
  PriceSeries series = synth_prices(args.length, args.seed, args.params);
  save_csv(series, args.out_path);
  std::cout << "wrote " << series.size() << " rows to " << args.out_path << " (max price "
            << series.price_max << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"battery arbitrage RL toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the configured cases and seeds");
  train->add_option("--config", train_args.config_path, "experiment config file")->required();
  train->add_option("--case", train_args.cases, "restrict to case 1|2|3 (repeatable)");
  train->add_option("--seed", train_args.seeds, "restrict to seed N (repeatable)");
  train->add_option("--out", train_args.out_dir, "output directory (overrides config)");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "run a checkpoint over a price CSV");
  evaluate->add_option("--checkpoint", eval_args.checkpoint_path, "parameter checkpoint")
      ->required();
  evaluate->add_option("--data", eval_args.data_path, "price CSV")->required();
  evaluate->add_option("--config", eval_args.config_path, "config file for battery parameters");
  evaluate->add_option("--price-max", eval_args.price_max,
                       "normalization constant (default: series maximum)");
  evaluate->add_option("--out", eval_args.trajectory_out, "write the trajectory CSV here");

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "dynamic-programming profit bound for a CSV");
  oracle->add_option("--data", oracle_args.data_path, "price CSV")->required();
  oracle->add_option("--config", oracle_args.config_path, "config file for battery parameters");
  oracle->add_option("--soc-grid", oracle_args.soc_grid, "SoC grid size (default 41)");
  oracle->add_option("--action-grid", oracle_args.action_grid, "action grid size (default 21)");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic price CSV");
  synth->add_option("--length", synth_args.length, "number of 30-minute steps")->required();
  synth->add_option("--seed", synth_args.seed, "generator seed (default 7)");
  synth->add_option("--out", synth_args.out_path, "output CSV path")->required();
  synth->add_option("--base", synth_args.params.base_usd, "base price USD/MWh");
  synth->add_option("--daily-amp", synth_args.params.daily_amplitude_usd, "daily amplitude");
  synth->add_option("--weekly-amp", synth_args.params.weekly_amplitude_usd, "weekly amplitude");
  synth->add_option("--noise", synth_args.params.noise_sigma_usd, "Gaussian noise sigma");
  synth->add_option("--spike-prob", synth_args.params.spike_prob, "per-step spike probability");
  synth->add_option("--spike-mag", synth_args.params.spike_magnitude_usd, "spike magnitude");
  synth->add_option("--floor", synth_args.params.floor_usd,
                    "price floor (negative allows negative prices)");
  synth->add_option("--start-epoch", synth_args.params.start_epoch_seconds,
                    "first timestamp, epoch seconds UTC");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // CLI misuse is a config error
  }

  try {
    if (*train) return run_train(train_args);
    if (*evaluate) return run_evaluate(eval_args);
    if (*oracle) return run_oracle(oracle_args);
    if (*synth) return run_synth(synth_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
