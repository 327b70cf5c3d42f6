#include "bessrl/battery_env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bessrl {

void BatteryParams::validate() const {
  if (!(capacity_mwh > 0.0)) throw ConfigError("battery: capacity_mwh must be > 0");
  if (!(e_step_mwh > 0.0)) throw ConfigError("battery: e_step_mwh must be > 0");
  if (!(eta_c > 0.0 && eta_c <= 1.0)) throw ConfigError("battery: eta_c must be in (0, 1]");
  if (!(eta_d > 0.0 && eta_d <= 1.0)) throw ConfigError("battery: eta_d must be in (0, 1]");
  if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0))
    throw ConfigError("battery: need 0 <= soc_min < soc_max <= 1");
  if (!(deg_cost_per_mwh >= 0.0)) throw ConfigError("battery: deg_cost_per_mwh must be >= 0");
  if (!(soc_init >= soc_min && soc_init <= soc_max))
    throw ConfigError("battery: soc_init must be within [soc_min, soc_max]");
}

FeasibleRange feasible_range(double soc, const BatteryParams& params) {
  if (!(soc >= params.soc_min && soc <= params.soc_max))
    throw ContractError("feasible_range: soc " + std::to_string(soc) + " outside [" +
                        std::to_string(params.soc_min) + ", " + std::to_string(params.soc_max) +
                        "]");
  FeasibleRange r;
  // written as 0 - x so a full battery yields +0.0, not -0.0
  r.p_c_bar = 0.0 - std::min(1.0, (params.soc_max - soc) * params.capacity_mwh /
                                      (params.eta_c * params.e_step_mwh));
  r.p_d_bar =
      std::min(1.0, (soc - params.soc_min) * params.capacity_mwh * params.eta_d / params.e_step_mwh);
  return r;
}

EnvState env_reset(const BatteryParams& params, long t0) {
  params.validate();
  EnvState s;
  s.t = t0;
  s.soc = params.soc_init;
  return s;
}

std::tuple<EnvState, double, StepInfo> env_step(const EnvState& state, double action,
                                                double price_usd_per_mwh,
                                                const BatteryParams& params) {
  if (!std::isfinite(action)) throw NumericError("env_step: non-finite action");
  if (!std::isfinite(price_usd_per_mwh)) throw NumericError("env_step: non-finite price");

  FeasibleRange range = feasible_range(state.soc, params);
  StepInfo info;
  info.a_eff = range.clamp(action);
  info.clamped = info.a_eff != action;
  info.grid_energy_mwh = std::fabs(info.a_eff) * params.e_step_mwh;

  EnvState next = state;
  next.t = state.t + 1;

  if (info.a_eff < 0.0) {
    // charging: grid_energy drawn at the meter, eta_c of it reaches the cells
    next.soc = state.soc + params.eta_c * info.grid_energy_mwh / params.capacity_mwh;
    info.charging_cost_delta_usd = -price_usd_per_mwh * info.grid_energy_mwh;
  } else if (info.a_eff > 0.0) {
    // discharging: grid_energy delivered at the meter, cells supply 1/eta_d of it
    next.soc = state.soc - info.grid_energy_mwh / (params.eta_d * params.capacity_mwh);
    info.discharging_revenue_delta_usd = price_usd_per_mwh * info.grid_energy_mwh;
  }
  info.degradation_cost_delta_usd = -params.deg_cost_per_mwh * info.grid_energy_mwh;

  // the clamp keeps soc in bounds analytically; snap off any last-ulp overshoot
  next.soc = std::clamp(next.soc, params.soc_min, params.soc_max);

  next.charging_cost_usd = state.charging_cost_usd + info.charging_cost_delta_usd;
  next.discharging_revenue_usd =
      state.discharging_revenue_usd + info.discharging_revenue_delta_usd;
  next.degradation_cost_usd = state.degradation_cost_usd + info.degradation_cost_delta_usd;

  double reward = info.step_profit_usd() * kRewardScalePerUsd;
  return {next, reward, info};
}

}  // namespace bessrl
