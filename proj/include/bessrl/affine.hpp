#pragma once

#include <span>
#include <vector>

#include "bessrl/tensor.hpp"

namespace bessrl {

// y = Wx + b
struct AffineParams {
  Tensor w;  // (out, in)
  Tensor b;  // (out)

  int in_size() const { return w.dim(1); }
  int out_size() const { return w.dim(0); }

  static AffineParams zeros(int in, int out);
  static AffineParams init(int in, int out, double k, Rng& rng);  // weights U[-k, k], bias 0
  void check_consistent() const;
};

struct AffineCache {
  std::vector<double> x;
};

std::vector<double> affine_forward(std::span<const double> x, const AffineParams& p,
                                   AffineCache* cache = nullptr);

// grad_x is overwritten, parameter gradients accumulate.
void affine_backward(std::span<const double> grad_y, const AffineCache& cache,
                     const AffineParams& p, std::vector<double>& grad_x,
                     AffineParams& param_grads);

}  // namespace bessrl
