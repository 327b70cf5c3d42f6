#pragma once

#include <span>
#include <vector>

#include "bessrl/tensor.hpp"

namespace bessrl {

// Single LSTM cell. Gate order along the 4H axis is fixed as
// (input, forget, cell candidate, output); no peepholes, no layer norm.
struct LstmCellParams {
  Tensor w_ih;  // (4H, D)
  Tensor w_hh;  // (4H, H)
  Tensor b;     // (4H)

  int input_size() const { return w_ih.dim(1); }
  int hidden_size() const { return w_hh.dim(1); }

  static LstmCellParams zeros(int input, int hidden);
  // weights uniform in [-1/sqrt(H), 1/sqrt(H)], forget-gate bias 1, rest 0
  static LstmCellParams init(int input, int hidden, Rng& rng);
  void check_consistent() const;
};

// Forward-pass intermediates retained for the backward pass.
struct LstmCellCache {
  int input_size = 0;
  int hidden_size = 0;
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> gate_i, gate_f, gate_g, gate_o;  // post-activation
  std::vector<double> c_new, tanh_c_new;
};

struct LstmStep {
  std::vector<double> h, c;
  LstmCellCache cache;
};

// c' = f*c + i*g, h' = o*tanh(c') with i,f,o sigmoid-gated and g = tanh.
LstmStep lstm_cell_forward(std::span<const double> x, std::span<const double> h,
                           std::span<const double> c, const LstmCellParams& p);

// Exact gradients of the forward map. Parameter gradients accumulate into
// `param_grads` (must match p's shapes); input gradients are overwritten.
void lstm_cell_backward(std::span<const double> grad_h_new, std::span<const double> grad_c_new,
                        const LstmCellCache& cache, const LstmCellParams& p,
                        std::vector<double>& grad_x, std::vector<double>& grad_h_prev,
                        std::vector<double>& grad_c_prev, LstmCellParams& param_grads);

}  // namespace bessrl
