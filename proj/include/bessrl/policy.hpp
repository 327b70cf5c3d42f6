#pragma once

#include <span>
#include <vector>

#include "bessrl/affine.hpp"
#include "bessrl/lstm.hpp"
#include "bessrl/rng.hpp"

namespace bessrl {

// One observation o_t: current SoC plus the normalized price.
struct Observation {
  double soc = 0.0;
  double price_norm = 0.0;
};

inline constexpr int kObservationSize = 2;

// Shared recurrent trunk (two stacked LSTM cells) with an actor head whose
// output is squashed by tanh into (-1, 1) and a raw critic head. sigma is the
// fixed Gaussian policy stddev; it is configuration, not a trained parameter.
struct NetworkParams {
  LstmCellParams lstm1;  // input -> hidden
  LstmCellParams lstm2;  // hidden -> hidden
  AffineParams actor_head;   // hidden -> 1
  AffineParams critic_head;  // hidden -> 1
  double sigma = 0.2;

  int input_size() const { return lstm1.input_size(); }
  int hidden_size() const { return lstm2.hidden_size(); }

  static NetworkParams init(int input, int hidden, double sigma, Rng& rng);
  static NetworkParams zeros(int input, int hidden, double sigma = 0.2);
  static NetworkParams zeros_like(const NetworkParams& other);

  // fixed tensor order, shared by the optimizer and the checkpoint format
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

// Recurrent carry for both layers; zeroed at episode start.
struct HiddenState {
  std::vector<double> h1, c1, h2, c2;

  static HiddenState zeros(int hidden);
};

struct PolicyStepCache {
  LstmCellCache lstm1, lstm2;
  AffineCache actor, critic;
  double actor_raw = 0.0;  // pre-tanh
  double mu = 0.0;
};

struct PolicyOut {
  double mu = 0.0;
  double value = 0.0;
};

// Advances the hidden state in place and returns (mu, value). Pass a cache
// to retain what the backward pass needs.
PolicyOut policy_forward(const Observation& obs, HiddenState& hidden, const NetworkParams& params,
                         PolicyStepCache* cache = nullptr);

// Gradient of one step given dL/dmu and dL/dvalue. `carry` holds dL/d(hidden
// after the step) on entry and dL/d(hidden before the step) on return;
// parameter gradients accumulate into `grads` (same layout as params).
struct PolicyBackCarry {
  std::vector<double> h1, c1, h2, c2;

  static PolicyBackCarry zeros(int hidden);
};

void policy_backward_step(double d_mu, double d_value, const PolicyStepCache& cache,
                          const NetworkParams& params, PolicyBackCarry& carry,
                          NetworkParams& grads);

double sample_action(double mu, double sigma, Rng& rng);
double log_prob(double mu, double sigma, double action);

// Runs the deterministic policy (action = mu) over a sequence from a zeroed
// hidden state; used for validation/test evaluation.
std::vector<double> act_deterministic(std::span<const Observation> observations,
                                      const NetworkParams& params);

}  // namespace bessrl
