#include "bessrl/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bessrl {

namespace {

constexpr double kMaxStepEvals = 2.5e8;

// Piecewise-linear interpolation of node values over an evenly spaced grid.
double interp(const std::vector<double>& grid, const std::vector<double>& values, double x) {
  int n = static_cast<int>(grid.size());
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  double span = grid.back() - grid.front();
  int i = static_cast<int>((x - grid.front()) / span * static_cast<double>(n - 1));
  i = std::clamp(i, 0, n - 2);
  // even spacing makes the index arithmetic exact up to rounding; nudge if needed
  while (i > 0 && x < grid[static_cast<size_t>(i)]) --i;
  while (i < n - 2 && x > grid[static_cast<size_t>(i + 1)]) ++i;
  double x0 = grid[static_cast<size_t>(i)];
  double x1 = grid[static_cast<size_t>(i + 1)];
  double w = (x - x0) / (x1 - x0);
  return values[static_cast<size_t>(i)] * (1.0 - w) + values[static_cast<size_t>(i + 1)] * w;
}

// One-step lookahead value: step profit from `soc` under `action` plus the
// interpolated continuation value at the resulting SoC.
double lookahead(double soc, double action, double price, const BatteryParams& battery,
                 const std::vector<double>& soc_grid, const std::vector<double>& v_next) {
  EnvState s;
  s.soc = soc;
  auto [next, reward, info] = env_step(s, action, price, battery);
  (void)reward;
  return info.step_profit_usd() + interp(soc_grid, v_next, next.soc);
}

}  // namespace

DpOracleResult dp_oracle(const PriceSeries& series, Segment segment, const BatteryParams& battery,
                         int soc_grid_size, int action_grid_size) {
  battery.validate();
  if (soc_grid_size < 2 || action_grid_size < 2)
    throw ConfigError("dp_oracle: grid sizes must be >= 2");
  if (segment.length <= 0) throw ContractError("dp_oracle: empty segment");
  if (segment.start < 0 || segment.start + segment.length > series.size())
    throw ContractError("dp_oracle: segment outside the series");

  int horizon = segment.length;
  double evals = static_cast<double>(horizon) * soc_grid_size * action_grid_size;
  if (evals > kMaxStepEvals)
    throw ConfigError("dp_oracle: refusing to enumerate ~" + std::to_string(evals) +
                      " step evaluations (limit " + std::to_string(kMaxStepEvals) +
                      "); shrink the horizon or grids");

  // endpoint rounding can overshoot the bounds by an ulp, which env_step rejects
  std::vector<double> soc_grid(static_cast<size_t>(soc_grid_size));
  for (int i = 0; i < soc_grid_size; ++i)
    soc_grid[static_cast<size_t>(i)] =
        std::clamp(battery.soc_min + (battery.soc_max - battery.soc_min) * static_cast<double>(i) /
                       static_cast<double>(soc_grid_size - 1),
                   battery.soc_min, battery.soc_max);

  // action lattice spans [-1, 1]; the hold action 0 is always available
  std::vector<double> action_grid(static_cast<size_t>(action_grid_size));
  for (int i = 0; i < action_grid_size; ++i)
    action_grid[static_cast<size_t>(i)] =
        -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(action_grid_size - 1);
  if (std::find(action_grid.begin(), action_grid.end(), 0.0) == action_grid.end())
    action_grid.push_back(0.0);

  // value[t][g]: best profit-to-go from soc_grid[g] at step t of the segment
  std::vector<std::vector<double>> value(static_cast<size_t>(horizon + 1),
                                         std::vector<double>(static_cast<size_t>(soc_grid_size), 0.0));
  for (int t = horizon - 1; t >= 0; --t) {
    double price = series.prices_usd[static_cast<size_t>(segment.start + t)];
    for (int g = 0; g < soc_grid_size; ++g) {
      double best = -std::numeric_limits<double>::infinity();
      for (double a : action_grid)
        best = std::max(best, lookahead(soc_grid[static_cast<size_t>(g)], a, price, battery,
                                        soc_grid, value[static_cast<size_t>(t + 1)]));
      value[static_cast<size_t>(t)][static_cast<size_t>(g)] = best;
    }
  }

  DpOracleResult result;
  result.actions.reserve(static_cast<size_t>(horizon));

  // greedy replay from the true continuous SoC through the real environment
  EnvState env = env_reset(battery, segment.start);
  for (int t = 0; t < horizon; ++t) {
    double price = series.prices_usd[static_cast<size_t>(segment.start + t)];
    double best_score = -std::numeric_limits<double>::infinity();
    double best_action = 0.0;
    for (double a : action_grid) {
      double score =
          lookahead(env.soc, a, price, battery, soc_grid, value[static_cast<size_t>(t + 1)]);
      if (score > best_score) {
        best_score = score;
        best_action = a;
      }
    }
    if (t == 0) result.optimal_profit_usd = best_score;  // Bellman value at (0, soc_init)
    auto [next, reward, info] = env_step(env, best_action, price, battery);
    (void)reward;
    (void)info;
    result.actions.push_back(best_action);
    env = next;
  }
  result.replay_profit_usd = env.total_profit_usd();
  return result;
}

}  // namespace bessrl
