#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bessrl/tensor.hpp"

namespace bessrl {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int worst_tensor = -1;
  int worst_index = -1;
  double tolerance = 0.0;

  bool passed() const { return max_rel_error <= tolerance; }
};

// Compares an analytic gradient against central finite differences of f.
// f must be deterministic in the current parameter values; params are
// perturbed in place and restored. rel error per component is
// |analytic - numeric| / max(|analytic|, |numeric|, denom_floor).
GradCheckReport grad_check(const std::function<double()>& f, std::span<Tensor* const> params,
                           std::span<const Tensor* const> analytic, double step = 1e-5,
                           double tolerance = 1e-4, double denom_floor = 1e-6);

}  // namespace bessrl
