#pragma once

#include <vector>

#include "bessrl/battery_env.hpp"
#include "bessrl/price_series.hpp"

namespace bessrl {

struct DpOracleResult {
  // Bellman value at (t = 0, soc = soc_init): the optimum over the
  // discretized SoC/action lattice, with linear interpolation between SoC
  // grid nodes.
  double optimal_profit_usd = 0.0;
  // Greedy replay of the value table from the true (continuous) SoC, one
  // lattice action per step, executed through the real environment step.
  std::vector<double> actions;
  double replay_profit_usd = 0.0;
};

// Backward value iteration over an evenly spaced SoC grid and action lattice,
// driving the exact same env_step used in training so oracle and environment
// cannot diverge. Refuses (config error, with a size estimate) when
// T * soc_grid * action_grid exceeds the enumeration guard.
DpOracleResult dp_oracle(const PriceSeries& series, Segment segment, const BatteryParams& battery,
                         int soc_grid_size, int action_grid_size);

}  // namespace bessrl
