#pragma once

#include <span>
#include <vector>

#include "bessrl/tensor.hpp"

namespace bessrl {

// Adam with bias correction over a fixed list of parameter tensors.
// One state object covers the whole parameter set; step_count advances by
// exactly one per adam_step call.
struct AdamState {
  std::vector<Tensor> m, v;
  long step_count = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(std::span<const Tensor* const> params, double lr,
                        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
};

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state);

}  // namespace bessrl
