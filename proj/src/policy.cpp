#include "bessrl/policy.hpp"

#include <cmath>
#include <numbers>

namespace bessrl {

NetworkParams NetworkParams::init(int input, int hidden, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw ConfigError("policy: sigma must be > 0");
  double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  NetworkParams p;
  p.lstm1 = LstmCellParams::init(input, hidden, rng);
  p.lstm2 = LstmCellParams::init(hidden, hidden, rng);
  p.actor_head = AffineParams::init(hidden, 1, k, rng);
  p.critic_head = AffineParams::init(hidden, 1, k, rng);
  p.sigma = sigma;
  return p;
}

NetworkParams NetworkParams::zeros(int input, int hidden, double sigma) {
  NetworkParams p;
  p.lstm1 = LstmCellParams::zeros(input, hidden);
  p.lstm2 = LstmCellParams::zeros(hidden, hidden);
  p.actor_head = AffineParams::zeros(hidden, 1);
  p.critic_head = AffineParams::zeros(hidden, 1);
  p.sigma = sigma;
  return p;
}

NetworkParams NetworkParams::zeros_like(const NetworkParams& other) {
  NetworkParams p = zeros(other.input_size(), other.hidden_size(), other.sigma);
  return p;
}

std::vector<Tensor*> NetworkParams::tensors() {
  return {&lstm1.w_ih, &lstm1.w_hh, &lstm1.b,  &lstm2.w_ih,    &lstm2.w_hh,
          &lstm2.b,    &actor_head.w, &actor_head.b, &critic_head.w, &critic_head.b};
}

std::vector<const Tensor*> NetworkParams::tensors() const {
  return {&lstm1.w_ih, &lstm1.w_hh, &lstm1.b,  &lstm2.w_ih,    &lstm2.w_hh,
          &lstm2.b,    &actor_head.w, &actor_head.b, &critic_head.w, &critic_head.b};
}

HiddenState HiddenState::zeros(int hidden) {
  HiddenState s;
  s.h1.assign(static_cast<size_t>(hidden), 0.0);
  s.c1.assign(static_cast<size_t>(hidden), 0.0);
  s.h2.assign(static_cast<size_t>(hidden), 0.0);
  s.c2.assign(static_cast<size_t>(hidden), 0.0);
  return s;
}

PolicyBackCarry PolicyBackCarry::zeros(int hidden) {
  PolicyBackCarry c;
  c.h1.assign(static_cast<size_t>(hidden), 0.0);
  c.c1.assign(static_cast<size_t>(hidden), 0.0);
  c.h2.assign(static_cast<size_t>(hidden), 0.0);
  c.c2.assign(static_cast<size_t>(hidden), 0.0);
  return c;
}

PolicyOut policy_forward(const Observation& obs, HiddenState& hidden, const NetworkParams& params,
                         PolicyStepCache* cache) {
  double x[2] = {obs.soc, obs.price_norm};
  std::span<const double> xin(x, static_cast<size_t>(params.input_size()));

  LstmStep s1 = lstm_cell_forward(xin, hidden.h1, hidden.c1, params.lstm1);
  LstmStep s2 = lstm_cell_forward(s1.h, hidden.h2, hidden.c2, params.lstm2);

  AffineCache actor_cache, critic_cache;
  std::vector<double> a_raw = affine_forward(s2.h, params.actor_head, &actor_cache);
  std::vector<double> v_raw = affine_forward(s2.h, params.critic_head, &critic_cache);

  PolicyOut out;
  out.mu = std::tanh(a_raw[0]);
  out.value = v_raw[0];

  if (cache) {
    cache->lstm1 = std::move(s1.cache);
    cache->lstm2 = std::move(s2.cache);
    cache->actor = std::move(actor_cache);
    cache->critic = std::move(critic_cache);
    cache->actor_raw = a_raw[0];
    cache->mu = out.mu;
  }

  hidden.h1 = std::move(s1.h);
  hidden.c1 = std::move(s1.c);
  hidden.h2 = std::move(s2.h);
  hidden.c2 = std::move(s2.c);
  return out;
}

void policy_backward_step(double d_mu, double d_value, const PolicyStepCache& cache,
                          const NetworkParams& params, PolicyBackCarry& carry,
                          NetworkParams& grads) {
  int hidden = params.hidden_size();
  double d_actor_raw = d_mu * (1.0 - cache.mu * cache.mu);

  std::vector<double> grad_h2(static_cast<size_t>(hidden), 0.0);
  {
    std::vector<double> gx;
    double gy[1] = {d_actor_raw};
    affine_backward(std::span<const double>(gy, 1), cache.actor, params.actor_head, gx,
                    grads.actor_head);
    for (int j = 0; j < hidden; ++j) grad_h2[static_cast<size_t>(j)] += gx[static_cast<size_t>(j)];
    gy[0] = d_value;
    affine_backward(std::span<const double>(gy, 1), cache.critic, params.critic_head, gx,
                    grads.critic_head);
    for (int j = 0; j < hidden; ++j) grad_h2[static_cast<size_t>(j)] += gx[static_cast<size_t>(j)];
  }
  for (int j = 0; j < hidden; ++j) grad_h2[static_cast<size_t>(j)] += carry.h2[static_cast<size_t>(j)];

  std::vector<double> grad_x2, grad_h2_prev, grad_c2_prev;
  lstm_cell_backward(grad_h2, carry.c2, cache.lstm2, params.lstm2, grad_x2, grad_h2_prev,
                     grad_c2_prev, grads.lstm2);

  std::vector<double> grad_h1(static_cast<size_t>(hidden));
  for (int j = 0; j < hidden; ++j)
    grad_h1[static_cast<size_t>(j)] =
        grad_x2[static_cast<size_t>(j)] + carry.h1[static_cast<size_t>(j)];

  std::vector<double> grad_x1, grad_h1_prev, grad_c1_prev;
  lstm_cell_backward(grad_h1, carry.c1, cache.lstm1, params.lstm1, grad_x1, grad_h1_prev,
                     grad_c1_prev, grads.lstm1);

  carry.h1 = std::move(grad_h1_prev);
  carry.c1 = std::move(grad_c1_prev);
  carry.h2 = std::move(grad_h2_prev);
  carry.c2 = std::move(grad_c2_prev);
}

double sample_action(double mu, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw ContractError("sample_action: sigma must be > 0");
  return mu + sigma * rng.normal();
}

double log_prob(double mu, double sigma, double action) {
  if (!(sigma > 0.0)) throw ContractError("log_prob: sigma must be > 0");
  double z = (action - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

std::vector<double> act_deterministic(std::span<const Observation> observations,
                                      const NetworkParams& params) {
  HiddenState hidden = HiddenState::zeros(params.hidden_size());
  std::vector<double> actions;
  actions.reserve(observations.size());
  for (const Observation& obs : observations)
    actions.push_back(policy_forward(obs, hidden, params).mu);
  return actions;
}

}  // namespace bessrl
