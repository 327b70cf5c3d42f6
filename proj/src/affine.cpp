#include "bessrl/affine.hpp"

namespace bessrl {

AffineParams AffineParams::zeros(int in, int out) {
  AffineParams p;
  p.w = Tensor::zeros({out, in});
  p.b = Tensor::zeros({out});
  return p;
}

AffineParams AffineParams::init(int in, int out, double k, Rng& rng) {
  AffineParams p;
  p.w = Tensor::uniform({out, in}, -k, k, rng);
  p.b = Tensor::zeros({out});
  return p;
}

void AffineParams::check_consistent() const {
  if (w.rank() != 2 || b.rank() != 1 || b.dim(0) != w.dim(0))
    throw ShapeError("affine params: inconsistent shapes");
}

std::vector<double> affine_forward(std::span<const double> x, const AffineParams& p,
                                   AffineCache* cache) {
  p.check_consistent();
  int in = p.in_size();
  int out = p.out_size();
  if (static_cast<int>(x.size()) != in) throw ShapeError("affine_forward: input size mismatch");

  std::vector<double> y(static_cast<size_t>(out));
  for (int r = 0; r < out; ++r) {
    double acc = p.b[r];
    const double* wr = p.w.data() + static_cast<size_t>(r) * in;
    for (int j = 0; j < in; ++j) acc += wr[j] * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(r)] = acc;
  }
  if (cache) cache->x.assign(x.begin(), x.end());
  return y;
}

void affine_backward(std::span<const double> grad_y, const AffineCache& cache,
                     const AffineParams& p, std::vector<double>& grad_x,
                     AffineParams& param_grads) {
  p.check_consistent();
  int in = p.in_size();
  int out = p.out_size();
  if (static_cast<int>(grad_y.size()) != out)
    throw ShapeError("affine_backward: upstream gradient size mismatch");
  if (static_cast<int>(cache.x.size()) != in)
    throw ContractError("affine_backward: cache does not match these parameters");
  if (!param_grads.w.same_shape(p.w) || !param_grads.b.same_shape(p.b))
    throw ShapeError("affine_backward: param_grads shape mismatch");

  grad_x.assign(static_cast<size_t>(in), 0.0);
  for (int r = 0; r < out; ++r) {
    double g = grad_y[static_cast<size_t>(r)];
    param_grads.b[r] += g;
    double* gw = param_grads.w.data() + static_cast<size_t>(r) * in;
    const double* wr = p.w.data() + static_cast<size_t>(r) * in;
    for (int j = 0; j < in; ++j) {
      gw[j] += g * cache.x[static_cast<size_t>(j)];
      grad_x[static_cast<size_t>(j)] += g * wr[j];
    }
  }
}

}  // namespace bessrl
