#include "bessrl/gradcheck.hpp"

#include <cmath>

namespace bessrl {

GradCheckReport grad_check(const std::function<double()>& f, std::span<Tensor* const> params,
                           std::span<const Tensor* const> analytic, double step, double tolerance,
                           double denom_floor) {
  if (params.size() != analytic.size())
    throw ShapeError("grad_check: parameter/gradient count mismatch");

  GradCheckReport rep;
  rep.tolerance = tolerance;
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& a = *analytic[i];
    require_same_shape(p, a, "grad_check");
    for (int j = 0; j < p.size(); ++j) {
      double saved = p[j];
      p[j] = saved + step;
      double fp = f();
      p[j] = saved - step;
      double fm = f();
      p[j] = saved;
      double numeric = (fp - fm) / (2.0 * step);
      double abs_err = std::fabs(a[j] - numeric);
      double denom = std::max({std::fabs(a[j]), std::fabs(numeric), denom_floor});
      double rel_err = abs_err / denom;
      if (rel_err > rep.max_rel_error) {
        rep.max_rel_error = rel_err;
        rep.worst_tensor = static_cast<int>(i);
        rep.worst_index = j;
      }
      rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
    }
  }
  return rep;
}

}  // namespace bessrl
