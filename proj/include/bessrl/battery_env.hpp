#pragma once

#include <tuple>

#include "bessrl/errors.hpp"

namespace bessrl {

// Storage physics constants. Defaults: 100 MWh battery, 50 MWh of grid-side
// energy per 30-minute step at full action, 95% one-way efficiency each
// direction, SoC confined to [0.1, 0.9], $10/MWh degradation on grid-side
// throughput, half-full at reset.
struct BatteryParams {
  double capacity_mwh = 100.0;
  double e_step_mwh = 50.0;
  double eta_c = 0.95;
  double eta_d = 0.95;
  double soc_min = 0.1;
  double soc_max = 0.9;
  double deg_cost_per_mwh = 10.0;
  double soc_init = 0.5;

  void validate() const;  // throws ConfigError
};

// SoC-dependent admissible action interval [p_c_bar, p_d_bar].
// Actions are dimensionless in [-1, 1]: negative = charging, positive =
// discharging; |a| * e_step_mwh is grid-side energy.
struct FeasibleRange {
  double p_c_bar = -1.0;  // lower bound, <= 0
  double p_d_bar = 1.0;   // upper bound, >= 0

  bool contains(double a) const { return a >= p_c_bar && a <= p_d_bar; }
  double clamp(double a) const { return a < p_c_bar ? p_c_bar : (a > p_d_bar ? p_d_bar : a); }
};

// Cumulative dollar ledgers follow the sign convention of the reported
// metrics: costs accumulate negative, revenue positive (for nonnegative
// prices). total_profit is their sum, exactly.
struct EnvState {
  long t = 0;
  double soc = 0.5;
  double charging_cost_usd = 0.0;
  double discharging_revenue_usd = 0.0;
  double degradation_cost_usd = 0.0;

  double total_profit_usd() const {
    return charging_cost_usd + discharging_revenue_usd + degradation_cost_usd;
  }
};

struct StepInfo {
  double a_eff = 0.0;
  bool clamped = false;
  double grid_energy_mwh = 0.0;  // unsigned throughput at the meter
  double charging_cost_delta_usd = 0.0;
  double discharging_revenue_delta_usd = 0.0;
  double degradation_cost_delta_usd = 0.0;

  double step_profit_usd() const {
    return charging_cost_delta_usd + discharging_revenue_delta_usd + degradation_cost_delta_usd;
  }
};

// Rewards are step profit in USD scaled by this factor to keep them O(1).
inline constexpr double kRewardScalePerUsd = 1e-3;

// p_c_bar = -min(1, (soc_max - soc) * capacity / (eta_c * e_step))
// p_d_bar =  min(1, (soc - soc_min) * capacity * eta_d / e_step)
FeasibleRange feasible_range(double soc, const BatteryParams& params);

EnvState env_reset(const BatteryParams& params, long t0 = 0);

// Clamps the action into the feasible range, applies SoC dynamics with
// one-way efficiencies, and updates the dollar ledgers. Pure transition.
std::tuple<EnvState, double, StepInfo> env_step(const EnvState& state, double action,
                                                double price_usd_per_mwh,
                                                const BatteryParams& params);

}  // namespace bessrl
