#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bessrl/battery_env.hpp"
#include "bessrl/ppo.hpp"
#include "bessrl/price_series.hpp"

namespace bessrl {

// Everything a full experiment needs, with the documented defaults. Loaded
// from a flat key=value config file; every field has a key of the same name
// (synth parameters are prefixed synth_*).
struct ExperimentConfig {
  // data source: a CSV path, or the synthetic generator when empty
  std::string data_csv;
  int synth_length = 2000;
  std::uint64_t synth_seed = 7;
  SynthParams synth;
  int n_train = 1000;
  int n_val = 500;
  int n_test = 500;
  double price_max = 0.0;  // normalization constant; 0 = max over the full series

  BatteryParams battery;
  PpoConfig ppo;  // ppo.case_id is overridden per run
  double sigma = 0.2;
  int hidden_size = 16;

  std::vector<CaseId> cases = {CaseId::case1, CaseId::case2, CaseId::case3};
  std::vector<std::uint64_t> seeds = {1};
  int max_updates = 500;
  int patience = 20;
  std::string out_dir = "out";
  int workers = 1;

  void validate() const;  // throws ConfigError
};

// Flat key=value text; '#' starts a comment; unknown keys and malformed
// values are rejected with line numbers. penalty_coeff defaults to c2 when
// not set explicitly.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

struct Dataset {
  PriceSeries series;
  SplitSegments segments;
};

// Loads the CSV or synthesizes prices, fixes the normalization constant, and
// records the chronological split.
Dataset build_dataset(const ExperimentConfig& cfg);

struct TrajectoryRow {
  long t = 0;
  double price_usd = 0.0;
  double soc = 0.0;  // SoC when acting (pre-step)
  double mu = 0.0;
  double a_eff = 0.0;
  bool clamped = false;
  double step_profit_usd = 0.0;
};

// Ledger totals of one deterministic rollout plus the per-step trajectory
// (price, SoC, action, profit). The reported per-step averages are the ledger
// totals divided by the segment length, exactly.
struct EvalResult {
  int steps = 0;
  double charging_cost_usd = 0.0;
  double discharging_revenue_usd = 0.0;
  double degradation_cost_usd = 0.0;
  double total_profit_usd = 0.0;
  std::vector<TrajectoryRow> trajectory;

  double charging_cost_avg_usd() const { return charging_cost_usd / steps; }
  double discharging_revenue_avg_usd() const { return discharging_revenue_usd / steps; }
  double degradation_cost_avg_usd() const { return degradation_cost_usd / steps; }
  double total_profit_avg_usd() const { return total_profit_usd / steps; }
};

// Closed-loop deterministic rollout (action = mu) over one segment.
EvalResult evaluate_policy(const NetworkParams& params, const PriceSeries& series, Segment segment,
                           const BatteryParams& battery);

struct CurveRow {
  int update = 0;
  double actor = 0.0;
  double critic = 0.0;
  double sup = 0.0;
  double total = 0.0;
  double val_profit_usd = 0.0;
};

struct RunResult {
  CaseId case_id = CaseId::case1;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string fail_reason;
  int updates_run = 0;
  int best_update = 0;  // 0 = the initial (untrained) policy
  double best_val_profit_usd = 0.0;
  NetworkParams params;  // best-validation parameters
  EvalResult test_eval;  // empty when failed
  std::vector<CurveRow> curve;
};

// Trains one (case, seed): per-update rollout + PPO update, deterministic
// validation after every update, best-snapshot early stopping, final test
// evaluation with the best parameters. Training divergence is reported via
// `failed`, never silently swallowed.
RunResult run_case(const ExperimentConfig& cfg, const Dataset& data, CaseId case_id,
                   std::uint64_t seed);

struct RunFiles {
  std::string checkpoint, trajectory, curve;  // basenames within out_dir
};
RunFiles run_file_names(CaseId case_id, std::uint64_t seed);

// Per-run products: checkpoint_<case>_<seed>.bin, trajectory_<case>_<seed>.csv,
// curve_<case>_<seed>.csv (no trajectory for failed runs).
void write_run_files(const std::string& out_dir, const RunResult& run);

// metrics.csv (one row per run, %.17g floats for bit-stable round-trips) and
// report.txt (the human-readable table, also returned by format_report_table).
void emit_report(const std::string& out_dir, const std::vector<RunResult>& runs);
std::string format_report_table(const std::vector<RunResult>& runs);

struct MetricsRow {
  std::string case_label;
  std::uint64_t seed = 0;
  bool failed = false;
  int steps = 0;
  double charging_cost_avg_usd = 0.0;
  double discharging_revenue_avg_usd = 0.0;
  double degradation_cost_avg_usd = 0.0;
  double total_profit_avg_usd = 0.0;
  double charging_cost_usd = 0.0;
  double discharging_revenue_usd = 0.0;
  double degradation_cost_usd = 0.0;
  double total_profit_usd = 0.0;
  int updates_run = 0;
  int best_update = 0;
  double best_val_profit_usd = 0.0;
  std::string checkpoint, trajectory, curve;
};
std::vector<MetricsRow> load_metrics_csv(const std::string& path);

// All (case, seed) runs over `workers` parallel slots, then every output
// file. Row order and file contents are deterministic regardless of worker
// scheduling.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

}  // namespace bessrl
