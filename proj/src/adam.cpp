#include "bessrl/adam.hpp"

#include <cmath>

namespace bessrl {

AdamState AdamState::init(std::span<const Tensor* const> params, double lr, double beta1,
                          double beta2, double eps) {
  AdamState st;
  st.lr = lr;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.eps = eps;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const Tensor* p : params) {
    st.m.push_back(Tensor::zeros(p->shape));
    st.v.push_back(Tensor::zeros(p->shape));
  }
  return st;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], *grads[i], "adam_step");
    require_same_shape(*params[i], state.m[i], "adam_step");
    if (!grads[i]->all_finite()) throw NumericError("adam_step: non-finite gradient");
  }

  state.step_count += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (int j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace bessrl
