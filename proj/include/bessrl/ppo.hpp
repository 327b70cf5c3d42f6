#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bessrl/adam.hpp"
#include "bessrl/battery_env.hpp"
#include "bessrl/policy.hpp"
#include "bessrl/price_series.hpp"

namespace bessrl {

// The three experimental variants:
//   case1 — plain PPO, no feasibility signal anywhere.
//   case2 — feasibility as reward shaping: the quadratic out-of-range penalty
//           is subtracted from the reward of the SAMPLED action.
//   case3 — feasibility as a supervising loss term on the policy MEAN,
//           weighted by c2 inside the total loss.
enum class CaseId { case1 = 1, case2 = 2, case3 = 3 };

const char* case_name(CaseId c);

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double c1 = 0.5;  // critic coefficient
  double c2 = 1.0;  // supervising coefficient (case3)
  int epochs_per_update = 10;
  double lr = 3e-4;
  int bptt_window = 64;  // 0 = backprop through the full episode
  CaseId case_id = CaseId::case3;
  double penalty_coeff = 1.0;  // case2 reward shaping weight

  void validate() const;  // throws ConfigError
};

struct Transition {
  Observation obs;
  double action = 0.0;
  double log_prob_old = 0.0;
  double reward = 0.0;
  double value = 0.0;  // V at collection time (old params)
  double mu_old = 0.0;
  FeasibleRange range;  // feasible range when the action was produced
  bool done = false;
};

// One episode of transitions plus GAE outputs and the recurrent states
// snapshotted at BPTT window boundaries during collection.
struct RolloutBuffer {
  std::vector<Transition> transitions;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<HiddenState> window_starts;
  int bptt_window = 0;  // snapshot interval used at collection (0 = one window)

  int size() const { return static_cast<int>(transitions.size()); }
  void clear();
};

// delta_t = r_t + gamma*V_{t+1} - V_t (terminal bootstrap 0);
// A_t = sum_k (gamma*lambda)^k delta_{t+k}; returns = A + values.
std::pair<std::vector<double>, std::vector<double>> compute_gae(std::span<const double> rewards,
                                                                std::span<const double> values,
                                                                double gamma, double lambda);

// Clipped surrogate min(R*A, clip(R, 1-eps, 1+eps)*A) with
// R = exp(lp_new - lp_old). This is maximized, so it enters the total loss
// negated. d_lp_new, when given, receives the derivative w.r.t. lp_new.
double actor_term(double log_prob_new, double log_prob_old, double advantage, double eps,
                  double* d_lp_new = nullptr);

// Squared TD error (r + gamma*v_next - v)^2; both value arguments carry
// gradient in the total loss.
double critic_term(double reward, double value_next, double value, double gamma);

// min(mu - p_c_bar, 0)^2 + min(p_d_bar - mu, 0)^2: zero inside the feasible
// range, quadratic outside. d_mu, when given, receives the derivative.
double supervising_term(double mu, const FeasibleRange& range, double* d_mu = nullptr);

// raw_reward - penalty_coeff * (same quadratic applied to the sampled action)
double case2_shaped_reward(double raw_reward, double action, const FeasibleRange& range,
                           double penalty_coeff);

struct LossTerms {
  double actor = 0.0;   // mean surrogate (pre-negation)
  double critic = 0.0;  // mean squared TD error
  double sup = 0.0;     // mean supervising term (0 unless case3)
  double total = 0.0;   // -actor + c1*critic (+ c2*sup under case3)
};

// Loss over transitions [begin, end) of the buffer, recomputing the network
// forward from hidden0 with the given params. `advantages` spans the entire
// buffer (indexed absolutely). The critic's V(s_{t+1}) at t = end-1 comes
// from one extra forward step when the buffer continues past `end`, and is 0
// at the terminal step.
LossTerms total_loss(const RolloutBuffer& buffer, int begin, int end,
                     std::span<const double> advantages, const HiddenState& hidden0,
                     const NetworkParams& params, const PpoConfig& config);

// Same evaluation, also accumulating dTotal/dparams into `grads`.
LossTerms total_loss_grad(const RolloutBuffer& buffer, int begin, int end,
                          std::span<const double> advantages, const HiddenState& hidden0,
                          const NetworkParams& params, const PpoConfig& config,
                          NetworkParams& grads);

// One on-policy episode over `segment`: hidden state starts zeroed, actions
// are sampled, rewards are case2-shaped when configured, GAE is computed, and
// window-boundary hidden states are snapshotted for truncated BPTT.
RolloutBuffer collect_rollout(const PriceSeries& series, Segment segment,
                              const BatteryParams& battery, const NetworkParams& params,
                              const PpoConfig& config, Rng& rng);

struct UpdateStats {
  double actor_mean = 0.0;
  double critic_mean = 0.0;
  double sup_mean = 0.0;
  double total_mean = 0.0;
  int windows = 0;  // loss evaluations counted into the means
};

// epochs_per_update passes over the buffer's BPTT windows, one Adam step per
// window; advantages are normalized (mean 0, std 1) on a working copy first.
// Throws TrainingError on a non-finite loss or gradient.
UpdateStats ppo_update(NetworkParams& params, const RolloutBuffer& buffer,
                       const PpoConfig& config, AdamState& adam);

}  // namespace bessrl
