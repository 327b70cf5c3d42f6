#include "bessrl/lstm.hpp"

#include <cmath>

namespace bessrl {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_dims(std::span<const double> x, std::span<const double> h,
                  std::span<const double> c, const LstmCellParams& p, const char* where) {
  p.check_consistent();
  int d = p.input_size();
  int hh = p.hidden_size();
  if (static_cast<int>(x.size()) != d || static_cast<int>(h.size()) != hh ||
      static_cast<int>(c.size()) != hh)
    throw ShapeError(std::string(where) + ": input sizes do not match cell dimensions");
}

}  // namespace

LstmCellParams LstmCellParams::zeros(int input, int hidden) {
  LstmCellParams p;
  p.w_ih = Tensor::zeros({4 * hidden, input});
  p.w_hh = Tensor::zeros({4 * hidden, hidden});
  p.b = Tensor::zeros({4 * hidden});
  return p;
}

LstmCellParams LstmCellParams::init(int input, int hidden, Rng& rng) {
  double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmCellParams p;
  p.w_ih = Tensor::uniform({4 * hidden, input}, -k, k, rng);
  p.w_hh = Tensor::uniform({4 * hidden, hidden}, -k, k, rng);
  p.b = Tensor::zeros({4 * hidden});
  for (int j = 0; j < hidden; ++j) p.b[hidden + j] = 1.0;  // forget gate lanes
  return p;
}

void LstmCellParams::check_consistent() const {
  if (w_ih.rank() != 2 || w_hh.rank() != 2 || b.rank() != 1)
    throw ShapeError("lstm params: bad ranks");
  int h4 = w_ih.dim(0);
  if (h4 % 4 != 0 || w_hh.dim(0) != h4 || b.dim(0) != h4 || w_hh.dim(1) != h4 / 4)
    throw ShapeError("lstm params: inconsistent gate dimensions");
}

LstmStep lstm_cell_forward(std::span<const double> x, std::span<const double> h,
                           std::span<const double> c, const LstmCellParams& p) {
  require_dims(x, h, c, p, "lstm_cell_forward");
  int d = p.input_size();
  int hh = p.hidden_size();

  std::vector<double> pre(static_cast<size_t>(4 * hh));
  for (int r = 0; r < 4 * hh; ++r) {
    double acc = p.b[r];
    const double* wi = p.w_ih.data() + static_cast<size_t>(r) * d;
    for (int j = 0; j < d; ++j) acc += wi[j] * x[static_cast<size_t>(j)];
    const double* wh = p.w_hh.data() + static_cast<size_t>(r) * hh;
    for (int j = 0; j < hh; ++j) acc += wh[j] * h[static_cast<size_t>(j)];
    pre[static_cast<size_t>(r)] = acc;
  }

  LstmStep out;
  out.h.resize(static_cast<size_t>(hh));
  out.c.resize(static_cast<size_t>(hh));
  LstmCellCache& cc = out.cache;
  cc.input_size = d;
  cc.hidden_size = hh;
  cc.x.assign(x.begin(), x.end());
  cc.h_prev.assign(h.begin(), h.end());
  cc.c_prev.assign(c.begin(), c.end());
  cc.gate_i.resize(static_cast<size_t>(hh));
  cc.gate_f.resize(static_cast<size_t>(hh));
  cc.gate_g.resize(static_cast<size_t>(hh));
  cc.gate_o.resize(static_cast<size_t>(hh));
  cc.c_new.resize(static_cast<size_t>(hh));
  cc.tanh_c_new.resize(static_cast<size_t>(hh));

  for (int j = 0; j < hh; ++j) {
    double gi = sigmoid(pre[static_cast<size_t>(j)]);
    double gf = sigmoid(pre[static_cast<size_t>(hh + j)]);
    double gg = std::tanh(pre[static_cast<size_t>(2 * hh + j)]);
    double go = sigmoid(pre[static_cast<size_t>(3 * hh + j)]);
    double cn = gf * c[static_cast<size_t>(j)] + gi * gg;
    double tc = std::tanh(cn);
    cc.gate_i[static_cast<size_t>(j)] = gi;
    cc.gate_f[static_cast<size_t>(j)] = gf;
    cc.gate_g[static_cast<size_t>(j)] = gg;
    cc.gate_o[static_cast<size_t>(j)] = go;
    cc.c_new[static_cast<size_t>(j)] = cn;
    cc.tanh_c_new[static_cast<size_t>(j)] = tc;
    out.c[static_cast<size_t>(j)] = cn;
    out.h[static_cast<size_t>(j)] = go * tc;
  }
  return out;
}

void lstm_cell_backward(std::span<const double> grad_h_new, std::span<const double> grad_c_new,
                        const LstmCellCache& cache, const LstmCellParams& p,
                        std::vector<double>& grad_x, std::vector<double>& grad_h_prev,
                        std::vector<double>& grad_c_prev, LstmCellParams& param_grads) {
  p.check_consistent();
  int d = p.input_size();
  int hh = p.hidden_size();
  if (cache.input_size != d || cache.hidden_size != hh)
    throw ContractError("lstm_cell_backward: cache does not match these parameters");
  if (static_cast<int>(grad_h_new.size()) != hh || static_cast<int>(grad_c_new.size()) != hh)
    throw ShapeError("lstm_cell_backward: upstream gradient size mismatch");
  if (!param_grads.w_ih.same_shape(p.w_ih) || !param_grads.w_hh.same_shape(p.w_hh) ||
      !param_grads.b.same_shape(p.b))
    throw ShapeError("lstm_cell_backward: param_grads shape mismatch");

  grad_x.assign(static_cast<size_t>(d), 0.0);
  grad_h_prev.assign(static_cast<size_t>(hh), 0.0);
  grad_c_prev.assign(static_cast<size_t>(hh), 0.0);

  // pre-activation gradients per gate, laid out like the forward 4H axis
  std::vector<double> dpre(static_cast<size_t>(4 * hh));
  for (int j = 0; j < hh; ++j) {
    double gi = cache.gate_i[static_cast<size_t>(j)];
    double gf = cache.gate_f[static_cast<size_t>(j)];
    double gg = cache.gate_g[static_cast<size_t>(j)];
    double go = cache.gate_o[static_cast<size_t>(j)];
    double tc = cache.tanh_c_new[static_cast<size_t>(j)];
    double dh = grad_h_new[static_cast<size_t>(j)];
    double dc = grad_c_new[static_cast<size_t>(j)] + dh * go * (1.0 - tc * tc);

    dpre[static_cast<size_t>(j)] = dc * gg * gi * (1.0 - gi);
    dpre[static_cast<size_t>(hh + j)] = dc * cache.c_prev[static_cast<size_t>(j)] * gf * (1.0 - gf);
    dpre[static_cast<size_t>(2 * hh + j)] = dc * gi * (1.0 - gg * gg);
    dpre[static_cast<size_t>(3 * hh + j)] = dh * tc * go * (1.0 - go);
    grad_c_prev[static_cast<size_t>(j)] = dc * gf;
  }

  for (int r = 0; r < 4 * hh; ++r) {
    double g = dpre[static_cast<size_t>(r)];
    param_grads.b[r] += g;
    double* gwi = param_grads.w_ih.data() + static_cast<size_t>(r) * d;
    const double* wi = p.w_ih.data() + static_cast<size_t>(r) * d;
    for (int j = 0; j < d; ++j) {
      gwi[j] += g * cache.x[static_cast<size_t>(j)];
      grad_x[static_cast<size_t>(j)] += g * wi[j];
    }
    double* gwh = param_grads.w_hh.data() + static_cast<size_t>(r) * hh;
    const double* wh = p.w_hh.data() + static_cast<size_t>(r) * hh;
    for (int j = 0; j < hh; ++j) {
      gwh[j] += g * cache.h_prev[static_cast<size_t>(j)];
      grad_h_prev[static_cast<size_t>(j)] += g * wh[j];
    }
  }
}

}  // namespace bessrl
