#include "bessrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bessrl {

const char* case_name(CaseId c) {
  switch (c) {
    case CaseId::case1: return "case1";
    case CaseId::case2: return "case2";
    case CaseId::case3: return "case3";
  }
  return "unknown";
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("ppo: gae_lambda must be in [0, 1]");
  if (!(clip_eps > 0.0)) throw ConfigError("ppo: clip_eps must be > 0");
  if (!(c1 >= 0.0)) throw ConfigError("ppo: c1 must be >= 0");
  if (!(c2 >= 0.0)) throw ConfigError("ppo: c2 must be >= 0");
  if (epochs_per_update < 1) throw ConfigError("ppo: epochs_per_update must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("ppo: lr must be > 0");
  if (bptt_window < 0) throw ConfigError("ppo: bptt_window must be >= 0 (0 = full episode)");
  if (!(penalty_coeff >= 0.0)) throw ConfigError("ppo: penalty_coeff must be >= 0");
}

void RolloutBuffer::clear() {
  transitions.clear();
  advantages.clear();
  returns.clear();
  window_starts.clear();
}

std::pair<std::vector<double>, std::vector<double>> compute_gae(std::span<const double> rewards,
                                                                std::span<const double> values,
                                                                double gamma, double lambda) {
  if (rewards.empty()) throw ContractError("compute_gae: empty input");
  if (rewards.size() != values.size()) throw ShapeError("compute_gae: length mismatch");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ContractError("compute_gae: gamma must be in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ContractError("compute_gae: lambda must be in [0, 1]");
  int n = static_cast<int>(rewards.size());
  std::vector<double> advantages(static_cast<size_t>(n));
  std::vector<double> returns(static_cast<size_t>(n));
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double v_next = (t + 1 < n) ? values[static_cast<size_t>(t + 1)] : 0.0;  // terminal bootstrap
    double delta = rewards[static_cast<size_t>(t)] + gamma * v_next - values[static_cast<size_t>(t)];
    gae = delta + gamma * lambda * gae;
    advantages[static_cast<size_t>(t)] = gae;
    returns[static_cast<size_t>(t)] = gae + values[static_cast<size_t>(t)];
  }
  return {std::move(advantages), std::move(returns)};
}

double actor_term(double log_prob_new, double log_prob_old, double advantage, double eps,
                  double* d_lp_new) {
  double ratio = std::exp(log_prob_new - log_prob_old);
  double unclipped = ratio * advantage;
  double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage;
  if (unclipped <= clipped) {
    // unclipped branch selected (ties included): d(R*A)/d(lp_new) = R*A' with dR/dlp = R
    if (d_lp_new) *d_lp_new = advantage * ratio;
    return unclipped;
  }
  // clip strictly active: the clipped value is constant in the ratio
  if (d_lp_new) *d_lp_new = 0.0;
  return clipped;
}

double critic_term(double reward, double value_next, double value, double gamma) {
  double delta = reward + gamma * value_next - value;
  return delta * delta;
}

double supervising_term(double mu, const FeasibleRange& range, double* d_mu) {
  if (!(range.p_c_bar <= 0.0 && range.p_d_bar >= 0.0))
    throw ContractError("supervising_term: range must satisfy p_c_bar <= 0 <= p_d_bar");
  double below = std::min(mu - range.p_c_bar, 0.0);  // negative only when mu < p_c_bar
  double above = std::min(range.p_d_bar - mu, 0.0);  // negative only when mu > p_d_bar
  if (d_mu) *d_mu = 2.0 * below - 2.0 * above;
  return below * below + above * above;
}

double case2_shaped_reward(double raw_reward, double action, const FeasibleRange& range,
                           double penalty_coeff) {
  double below = std::min(action - range.p_c_bar, 0.0);
  double above = std::min(range.p_d_bar - action, 0.0);
  return raw_reward - penalty_coeff * (below * below + above * above);
}

namespace {

// Shared forward (+ optional backward) evaluation of the total loss over one
// BPTT window. With grads == nullptr this is the plain loss.
LossTerms eval_window(const RolloutBuffer& buffer, int begin, int end,
                      std::span<const double> advantages, const HiddenState& hidden0,
                      const NetworkParams& params, const PpoConfig& config,
                      NetworkParams* grads) {
  int n = buffer.size();
  if (n == 0) throw ContractError("total_loss: empty buffer");
  if (begin < 0 || end <= begin || end > n) throw ContractError("total_loss: bad window bounds");
  if (static_cast<int>(advantages.size()) != n)
    throw ContractError("total_loss: advantages not computed for this buffer");

  int count = end - begin;
  double inv_n = 1.0 / static_cast<double>(count);
  bool use_sup = config.case_id == CaseId::case3;
  double sigma2 = params.sigma * params.sigma;

  std::vector<PolicyStepCache> caches(grads ? static_cast<size_t>(count) : 0);
  std::vector<double> mus(static_cast<size_t>(count));
  std::vector<double> values(static_cast<size_t>(count));
  HiddenState hidden = hidden0;
  for (int i = 0; i < count; ++i) {
    const Transition& tr = buffer.transitions[static_cast<size_t>(begin + i)];
    PolicyOut out =
        policy_forward(tr.obs, hidden, params, grads ? &caches[static_cast<size_t>(i)] : nullptr);
    mus[static_cast<size_t>(i)] = out.mu;
    values[static_cast<size_t>(i)] = out.value;
  }

  // V(s_{end}) for the last in-window TD error: one extra forward step when
  // the episode continues, 0 at the terminal step.
  bool has_extra = !buffer.transitions[static_cast<size_t>(end - 1)].done;
  double value_extra = 0.0;
  PolicyStepCache cache_extra;
  if (has_extra) {
    if (end >= n)
      throw ContractError("total_loss: window end is non-terminal but has no next observation");
    PolicyOut out = policy_forward(buffer.transitions[static_cast<size_t>(end)].obs, hidden,
                                   params, grads ? &cache_extra : nullptr);
    value_extra = out.value;
  }

  double actor_sum = 0.0, critic_sum = 0.0, sup_sum = 0.0;
  std::vector<double> d_mu(static_cast<size_t>(count), 0.0);
  std::vector<double> deltas(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Transition& tr = buffer.transitions[static_cast<size_t>(begin + i)];
    double mu = mus[static_cast<size_t>(i)];

    double lp_new = log_prob(mu, params.sigma, tr.action);
    double d_lp = 0.0;
    actor_sum += actor_term(lp_new, tr.log_prob_old, advantages[static_cast<size_t>(begin + i)],
                            config.clip_eps, &d_lp);
    // surrogate is maximized: it enters the total negated
    d_mu[static_cast<size_t>(i)] -= inv_n * d_lp * (tr.action - mu) / sigma2;

    double v_next = (i + 1 < count) ? values[static_cast<size_t>(i + 1)]
                                    : (has_extra ? value_extra : 0.0);
    double delta = tr.reward + config.gamma * v_next - values[static_cast<size_t>(i)];
    deltas[static_cast<size_t>(i)] = delta;
    critic_sum += delta * delta;

    if (use_sup) {
      double d_s = 0.0;
      sup_sum += supervising_term(mu, tr.range, &d_s);
      if (config.c2 != 0.0) d_mu[static_cast<size_t>(i)] += inv_n * config.c2 * d_s;
    }
  }

  LossTerms terms;
  terms.actor = actor_sum * inv_n;
  terms.critic = critic_sum * inv_n;
  terms.sup = use_sup ? sup_sum * inv_n : 0.0;
  terms.total = -terms.actor + config.c1 * terms.critic;
  if (use_sup) terms.total += config.c2 * terms.sup;
  if (!grads) return terms;

  // dTotal/dV_t: -2*delta_t from its own TD error, +2*gamma*delta_{t-1} as
  // the previous step's bootstrap (the squared TD error differentiates
  // through both value evaluations).
  std::vector<double> d_value(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    double g = -2.0 * deltas[static_cast<size_t>(i)];
    if (i > 0) g += 2.0 * config.gamma * deltas[static_cast<size_t>(i - 1)];
    d_value[static_cast<size_t>(i)] = inv_n * config.c1 * g;
  }

  PolicyBackCarry carry = PolicyBackCarry::zeros(params.hidden_size());
  if (has_extra) {
    double d_value_extra = inv_n * config.c1 * 2.0 * config.gamma * deltas[static_cast<size_t>(count - 1)];
    policy_backward_step(0.0, d_value_extra, cache_extra, params, carry, *grads);
  }
  for (int i = count - 1; i >= 0; --i)
    policy_backward_step(d_mu[static_cast<size_t>(i)], d_value[static_cast<size_t>(i)],
                         caches[static_cast<size_t>(i)], params, carry, *grads);
  return terms;
}

}  // namespace

LossTerms total_loss(const RolloutBuffer& buffer, int begin, int end,
                     std::span<const double> advantages, const HiddenState& hidden0,
                     const NetworkParams& params, const PpoConfig& config) {
  return eval_window(buffer, begin, end, advantages, hidden0, params, config, nullptr);
}

LossTerms total_loss_grad(const RolloutBuffer& buffer, int begin, int end,
                          std::span<const double> advantages, const HiddenState& hidden0,
                          const NetworkParams& params, const PpoConfig& config,
                          NetworkParams& grads) {
  return eval_window(buffer, begin, end, advantages, hidden0, params, config, &grads);
}

RolloutBuffer collect_rollout(const PriceSeries& series, Segment segment,
                              const BatteryParams& battery, const NetworkParams& params,
                              const PpoConfig& config, Rng& rng) {
  config.validate();
  battery.validate();
  if (segment.length <= 0) throw ContractError("collect_rollout: empty segment");
  if (segment.start < 0 || segment.start + segment.length > series.size())
    throw ContractError("collect_rollout: segment outside the series");
  if (!(series.price_max > 0.0))
    throw ContractError("collect_rollout: series.price_max must be > 0 for normalization");

  int n = segment.length;
  int window = config.bptt_window <= 0 ? n : config.bptt_window;

  RolloutBuffer buf;
  buf.bptt_window = config.bptt_window;
  buf.transitions.reserve(static_cast<size_t>(n));

  HiddenState hidden = HiddenState::zeros(params.hidden_size());
  EnvState env = env_reset(battery, segment.start);
  for (int i = 0; i < n; ++i) {
    if (i % window == 0) buf.window_starts.push_back(hidden);
    double price = series.prices_usd[static_cast<size_t>(segment.start + i)];
    Observation obs{env.soc, price / series.price_max};
    PolicyOut out = policy_forward(obs, hidden, params);
    double action = sample_action(out.mu, params.sigma, rng);
    FeasibleRange range = feasible_range(env.soc, battery);
    auto [next, reward, info] = env_step(env, action, price, battery);
    (void)info;
    if (config.case_id == CaseId::case2)
      reward = case2_shaped_reward(reward, action, range, config.penalty_coeff);

    Transition tr;
    tr.obs = obs;
    tr.action = action;
    tr.log_prob_old = log_prob(out.mu, params.sigma, action);
    tr.reward = reward;
    tr.value = out.value;
    tr.mu_old = out.mu;
    tr.range = range;
    tr.done = i == n - 1;
    buf.transitions.push_back(tr);
    env = next;
  }

  std::vector<double> rewards(static_cast<size_t>(n)), values(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    rewards[static_cast<size_t>(i)] = buf.transitions[static_cast<size_t>(i)].reward;
    values[static_cast<size_t>(i)] = buf.transitions[static_cast<size_t>(i)].value;
  }
  std::tie(buf.advantages, buf.returns) =
      compute_gae(rewards, values, config.gamma, config.gae_lambda);
  return buf;
}

UpdateStats ppo_update(NetworkParams& params, const RolloutBuffer& buffer,
                       const PpoConfig& config, AdamState& adam) {
  config.validate();
  int n = buffer.size();
  if (n == 0) throw ContractError("ppo_update: empty buffer");
  if (static_cast<int>(buffer.advantages.size()) != n)
    throw ContractError("ppo_update: advantages not computed");
  if (buffer.bptt_window != config.bptt_window)
    throw ContractError("ppo_update: buffer collected with a different bptt_window");
  int window = config.bptt_window <= 0 ? n : config.bptt_window;
  int n_windows = (n + window - 1) / window;
  if (static_cast<int>(buffer.window_starts.size()) != n_windows)
    throw ContractError("ppo_update: window-boundary hidden states missing");

  // normalized working copy; the buffer's raw advantages stay untouched
  std::vector<double> adv(buffer.advantages.begin(), buffer.advantages.end());
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : adv) a = (a - mean) * scale;

  std::vector<Tensor*> tensors = params.tensors();
  NetworkParams grads = NetworkParams::zeros_like(params);
  std::vector<Tensor*> grad_tensors = grads.tensors();
  std::vector<const Tensor*> grad_view(grad_tensors.begin(), grad_tensors.end());

  UpdateStats stats;
  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    for (int w = 0; w < n_windows; ++w) {
      int begin = w * window;
      int end = std::min(n, begin + window);
      for (Tensor* g : grad_tensors) g->fill(0.0);
      LossTerms terms = eval_window(buffer, begin, end, adv,
                                    buffer.window_starts[static_cast<size_t>(w)], params, config,
                                    &grads);
      if (!std::isfinite(terms.total))
        throw TrainingError("ppo_update: non-finite loss at epoch " + std::to_string(epoch) +
                            ", window " + std::to_string(w) + " (actor=" +
                            std::to_string(terms.actor) + ", critic=" +
                            std::to_string(terms.critic) + ", sup=" + std::to_string(terms.sup) +
                            ")");
      try {
        adam_step(tensors, grad_view, adam);
      } catch (const NumericError& e) {
        throw TrainingError("ppo_update: aborted at epoch " + std::to_string(epoch) +
                            ", window " + std::to_string(w) + ": " + e.what());
      }
      stats.actor_mean += terms.actor;
      stats.critic_mean += terms.critic;
      stats.sup_mean += terms.sup;
      stats.total_mean += terms.total;
      ++stats.windows;
    }
  }
  if (stats.windows > 0) {
    double inv = 1.0 / static_cast<double>(stats.windows);
    stats.actor_mean *= inv;
    stats.critic_mean *= inv;
    stats.sup_mean *= inv;
    stats.total_mean *= inv;
  }
  return stats;
}

}  // namespace bessrl
