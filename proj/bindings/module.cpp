// Python bindings for the toolkit's main operations: price data, the battery
// environment, the oracle, checkpoints, and the experiment harness. Everything
// crosses the boundary by value, so Python holds copies, never views.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bessrl/checkpoint.hpp"
#include "bessrl/dp_oracle.hpp"
#include "bessrl/experiment.hpp"

namespace py = pybind11;
using namespace bessrl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "battery arbitrage RL toolkit";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<TrainingError>(m, "TrainingError");
  py::register_exception<ContractError>(m, "ContractError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<ShapeError>(m, "ShapeError");

  py::enum_<CaseId>(m, "CaseId")
      .value("case1", CaseId::case1)
      .value("case2", CaseId::case2)
      .value("case3", CaseId::case3);
  m.def("case_name", &case_name);

  // ---- price data -------------------------------------------------------
  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("base_usd", &SynthParams::base_usd)
      .def_readwrite("daily_amplitude_usd", &SynthParams::daily_amplitude_usd)
      .def_readwrite("weekly_amplitude_usd", &SynthParams::weekly_amplitude_usd)
      .def_readwrite("noise_sigma_usd", &SynthParams::noise_sigma_usd)
      .def_readwrite("spike_prob", &SynthParams::spike_prob)
      .def_readwrite("spike_magnitude_usd", &SynthParams::spike_magnitude_usd)
      .def_readwrite("floor_usd", &SynthParams::floor_usd)
      .def_readwrite("start_epoch_seconds", &SynthParams::start_epoch_seconds);

  py::class_<PriceSeries>(m, "PriceSeries")
      .def(py::init<>())
      .def_readwrite("timestamps_utc", &PriceSeries::timestamps_utc)
      .def_readwrite("prices_usd", &PriceSeries::prices_usd)
      .def_readwrite("price_max", &PriceSeries::price_max)
      .def_readwrite("train_end", &PriceSeries::train_end)
      .def_readwrite("val_end", &PriceSeries::val_end)
      .def("size", &PriceSeries::size)
      .def("validate", &PriceSeries::validate);

  py::class_<Segment>(m, "Segment")
      .def(py::init<>())
      .def(py::init([](int start, int length) { return Segment{start, length}; }))
      .def_readwrite("start", &Segment::start)
      .def_readwrite("length", &Segment::length);

  py::class_<SplitSegments>(m, "SplitSegments")
      .def_readwrite("train", &SplitSegments::train)
      .def_readwrite("val", &SplitSegments::val)
      .def_readwrite("test", &SplitSegments::test);

  m.def("synth_prices", &synth_prices, py::arg("length"), py::arg("seed"),
        py::arg("params") = SynthParams{});
  m.def("load_csv", &load_csv);
  m.def("save_csv", &save_csv);
  m.def("normalize", &normalize, py::arg("series"), py::arg("price_max") = 0.0);
  m.def("chrono_split", &chrono_split);
  m.def("parse_iso8601_utc", &parse_iso8601_utc);
  m.def("format_iso8601_utc", &format_iso8601_utc);

  // ---- battery environment ----------------------------------------------
  py::class_<BatteryParams>(m, "BatteryParams")
      .def(py::init<>())
      .def_readwrite("capacity_mwh", &BatteryParams::capacity_mwh)
      .def_readwrite("e_step_mwh", &BatteryParams::e_step_mwh)
      .def_readwrite("eta_c", &BatteryParams::eta_c)
      .def_readwrite("eta_d", &BatteryParams::eta_d)
      .def_readwrite("soc_min", &BatteryParams::soc_min)
      .def_readwrite("soc_max", &BatteryParams::soc_max)
      .def_readwrite("deg_cost_per_mwh", &BatteryParams::deg_cost_per_mwh)
      .def_readwrite("soc_init", &BatteryParams::soc_init)
      .def("validate", &BatteryParams::validate);

  py::class_<FeasibleRange>(m, "FeasibleRange")
      .def(py::init<>())
      .def_readwrite("p_c_bar", &FeasibleRange::p_c_bar)
      .def_readwrite("p_d_bar", &FeasibleRange::p_d_bar)
      .def("contains", &FeasibleRange::contains)
      .def("clamp", &FeasibleRange::clamp);

  py::class_<EnvState>(m, "EnvState")
      .def(py::init<>())
      .def_readwrite("t", &EnvState::t)
      .def_readwrite("soc", &EnvState::soc)
      .def_readwrite("charging_cost_usd", &EnvState::charging_cost_usd)
      .def_readwrite("discharging_revenue_usd", &EnvState::discharging_revenue_usd)
      .def_readwrite("degradation_cost_usd", &EnvState::degradation_cost_usd)
      .def("total_profit_usd", &EnvState::total_profit_usd);

  py::class_<StepInfo>(m, "StepInfo")
      .def_readonly("a_eff", &StepInfo::a_eff)
      .def_readonly("clamped", &StepInfo::clamped)
      .def_readonly("grid_energy_mwh", &StepInfo::grid_energy_mwh)
      .def_readonly("charging_cost_delta_usd", &StepInfo::charging_cost_delta_usd)
      .def_readonly("discharging_revenue_delta_usd", &StepInfo::discharging_revenue_delta_usd)
      .def_readonly("degradation_cost_delta_usd", &StepInfo::degradation_cost_delta_usd)
      .def("step_profit_usd", &StepInfo::step_profit_usd);

  m.attr("REWARD_SCALE_PER_USD") = kRewardScalePerUsd;
  m.def("feasible_range", &feasible_range);
  m.def("env_reset", &env_reset, py::arg("params"), py::arg("t0") = 0);
  m.def("env_step", &env_step, py::arg("state"), py::arg("action"),
        py::arg("price_usd_per_mwh"), py::arg("params"));

  // ---- loss pieces -------------------------------------------------------
  m.def(
      "supervising_term",
      [](double mu, const FeasibleRange& range) { return supervising_term(mu, range); },
      py::arg("mu"), py::arg("range"));
  m.def(
      "supervising_term_with_grad",
      [](double mu, const FeasibleRange& range) {
        double d_mu = 0.0;
        double value = supervising_term(mu, range, &d_mu);
        return std::make_pair(value, d_mu);
      },
      py::arg("mu"), py::arg("range"));
  m.def("case2_shaped_reward", &case2_shaped_reward, py::arg("raw_reward"), py::arg("action"),
        py::arg("range"), py::arg("penalty_coeff"));
  m.def(
      "compute_gae",
      [](const std::vector<double>& rewards, const std::vector<double>& values, double gamma,
         double lambda) { return compute_gae(rewards, values, gamma, lambda); },
      py::arg("rewards"), py::arg("values"), py::arg("gamma"), py::arg("lambda"));

  // ---- policy network and checkpoints ------------------------------------
  py::class_<NetworkParams>(m, "NetworkParams")
      .def_static(
          "init",
          [](int input, int hidden, double sigma, std::uint64_t seed) {
            Rng rng(seed);
            return NetworkParams::init(input, hidden, sigma, rng);
          },
          py::arg("input"), py::arg("hidden"), py::arg("sigma"), py::arg("seed"))
      .def_static("zeros", &NetworkParams::zeros, py::arg("input"), py::arg("hidden"),
                  py::arg("sigma") = 0.2)
      .def_property_readonly("input_size", &NetworkParams::input_size)
      .def_property_readonly("hidden_size", &NetworkParams::hidden_size)
      .def_readwrite("sigma", &NetworkParams::sigma)
      .def("flatten", [](const NetworkParams& p) {
        std::vector<double> flat;
        for (const Tensor* t : p.tensors())
          flat.insert(flat.end(), t->values.begin(), t->values.end());
        return flat;
      });

  m.def("save_checkpoint", &save_checkpoint);
  m.def("load_checkpoint", &load_checkpoint);

  m.attr("OBSERVATION_SIZE") = kObservationSize;

  // ---- oracle -------------------------------------------------------------
  py::class_<DpOracleResult>(m, "DpOracleResult")
      .def_readonly("optimal_profit_usd", &DpOracleResult::optimal_profit_usd)
      .def_readonly("actions", &DpOracleResult::actions)
      .def_readonly("replay_profit_usd", &DpOracleResult::replay_profit_usd);

  m.def("dp_oracle", &dp_oracle, py::arg("series"), py::arg("segment"), py::arg("battery"),
        py::arg("soc_grid_size"), py::arg("action_grid_size"),
        py::call_guard<py::gil_scoped_release>());

  // ---- experiment harness -------------------------------------------------
  py::class_<PpoConfig>(m, "PpoConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &PpoConfig::gamma)
      .def_readwrite("gae_lambda", &PpoConfig::gae_lambda)
      .def_readwrite("clip_eps", &PpoConfig::clip_eps)
      .def_readwrite("c1", &PpoConfig::c1)
      .def_readwrite("c2", &PpoConfig::c2)
      .def_readwrite("epochs_per_update", &PpoConfig::epochs_per_update)
      .def_readwrite("lr", &PpoConfig::lr)
      .def_readwrite("bptt_window", &PpoConfig::bptt_window)
      .def_readwrite("case_id", &PpoConfig::case_id)
      .def_readwrite("penalty_coeff", &PpoConfig::penalty_coeff)
      .def("validate", &PpoConfig::validate);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("data_csv", &ExperimentConfig::data_csv)
      .def_readwrite("synth_length", &ExperimentConfig::synth_length)
      .def_readwrite("synth_seed", &ExperimentConfig::synth_seed)
      .def_readwrite("synth", &ExperimentConfig::synth)
      .def_readwrite("n_train", &ExperimentConfig::n_train)
      .def_readwrite("n_val", &ExperimentConfig::n_val)
      .def_readwrite("n_test", &ExperimentConfig::n_test)
      .def_readwrite("price_max", &ExperimentConfig::price_max)
      .def_readwrite("battery", &ExperimentConfig::battery)
      .def_readwrite("ppo", &ExperimentConfig::ppo)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("hidden_size", &ExperimentConfig::hidden_size)
      .def_readwrite("cases", &ExperimentConfig::cases)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("max_updates", &ExperimentConfig::max_updates)
      .def_readwrite("patience", &ExperimentConfig::patience)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def("validate", &ExperimentConfig::validate);

  m.def("parse_config_text", &parse_config_text, py::arg("text"), py::arg("origin") = "<string>");
  m.def("parse_config_file", &parse_config_file);

  py::class_<Dataset>(m, "Dataset")
      .def_readwrite("series", &Dataset::series)
      .def_readwrite("segments", &Dataset::segments);
  m.def("build_dataset", &build_dataset);

  py::class_<TrajectoryRow>(m, "TrajectoryRow")
      .def_readonly("t", &TrajectoryRow::t)
      .def_readonly("price_usd", &TrajectoryRow::price_usd)
      .def_readonly("soc", &TrajectoryRow::soc)
      .def_readonly("mu", &TrajectoryRow::mu)
      .def_readonly("a_eff", &TrajectoryRow::a_eff)
      .def_readonly("clamped", &TrajectoryRow::clamped)
      .def_readonly("step_profit_usd", &TrajectoryRow::step_profit_usd);

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("steps", &EvalResult::steps)
      .def_readonly("charging_cost_usd", &EvalResult::charging_cost_usd)
      .def_readonly("discharging_revenue_usd", &EvalResult::discharging_revenue_usd)
      .def_readonly("degradation_cost_usd", &EvalResult::degradation_cost_usd)
      .def_readonly("total_profit_usd", &EvalResult::total_profit_usd)
      .def_readonly("trajectory", &EvalResult::trajectory)
      .def("charging_cost_avg_usd", &EvalResult::charging_cost_avg_usd)
      .def("discharging_revenue_avg_usd", &EvalResult::discharging_revenue_avg_usd)
      .def("degradation_cost_avg_usd", &EvalResult::degradation_cost_avg_usd)
      .def("total_profit_avg_usd", &EvalResult::total_profit_avg_usd);

  m.def("evaluate_policy", &evaluate_policy, py::arg("params"), py::arg("series"),
        py::arg("segment"), py::arg("battery"), py::call_guard<py::gil_scoped_release>());

  py::class_<CurveRow>(m, "CurveRow")
      .def_readonly("update", &CurveRow::update)
      .def_readonly("actor", &CurveRow::actor)
      .def_readonly("critic", &CurveRow::critic)
      .def_readonly("sup", &CurveRow::sup)
      .def_readonly("total", &CurveRow::total)
      .def_readonly("val_profit_usd", &CurveRow::val_profit_usd);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("case_id", &RunResult::case_id)
      .def_readonly("seed", &RunResult::seed)
      .def_readonly("failed", &RunResult::failed)
      .def_readonly("fail_reason", &RunResult::fail_reason)
      .def_readonly("updates_run", &RunResult::updates_run)
      .def_readonly("best_update", &RunResult::best_update)
      .def_readonly("best_val_profit_usd", &RunResult::best_val_profit_usd)
      .def_readonly("params", &RunResult::params)
      .def_readonly("test_eval", &RunResult::test_eval)
      .def_readonly("curve", &RunResult::curve);

  m.def("run_case", &run_case, py::arg("cfg"), py::arg("data"), py::arg("case_id"),
        py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("run_experiment", &run_experiment, py::arg("cfg"),
        py::call_guard<py::gil_scoped_release>());
  m.def("format_report_table", &format_report_table);

  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("case_label", &MetricsRow::case_label)
      .def_readonly("seed", &MetricsRow::seed)
      .def_readonly("failed", &MetricsRow::failed)
      .def_readonly("steps", &MetricsRow::steps)
      .def_readonly("charging_cost_avg_usd", &MetricsRow::charging_cost_avg_usd)
      .def_readonly("discharging_revenue_avg_usd", &MetricsRow::discharging_revenue_avg_usd)
      .def_readonly("degradation_cost_avg_usd", &MetricsRow::degradation_cost_avg_usd)
      .def_readonly("total_profit_avg_usd", &MetricsRow::total_profit_avg_usd)
      .def_readonly("charging_cost_usd", &MetricsRow::charging_cost_usd)
      .def_readonly("discharging_revenue_usd", &MetricsRow::discharging_revenue_usd)
      .def_readonly("degradation_cost_usd", &MetricsRow::degradation_cost_usd)
      .def_readonly("total_profit_usd", &MetricsRow::total_profit_usd)
      .def_readonly("updates_run", &MetricsRow::updates_run)
      .def_readonly("best_update", &MetricsRow::best_update)
      .def_readonly("best_val_profit_usd", &MetricsRow::best_val_profit_usd)
      .def_readonly("checkpoint", &MetricsRow::checkpoint)
      .def_readonly("trajectory", &MetricsRow::trajectory)
      .def_readonly("curve", &MetricsRow::curve);
  m.def("load_metrics_csv", &load_metrics_csv);
}
