#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dualcap/tensor/ops.hpp"

namespace dualcap {

// Scalar-valued function of one tensor. The checker mutates the elements of
// the tensor it was given and re-evaluates f, so f may either use its
// argument or close over the same tensor handle (the model case, where the
// checked tensor is one parameter among many).
using ScalarFn = std::function<Tensor(const Tensor&)>;

// Compares the analytic gradient of f at x against central finite
// differences with step eps, element by element. Returns
// max_i |analytic_i - numeric_i| / max(1, |analytic_i|).
// f must be deterministic; two baseline evaluations that differ are
// rejected. Gradient checking runs at 64-bit precision only.
double finite_difference_check(const ScalarFn& f, Tensor x, double eps);

// Named per-tensor result for multi-parameter sweeps.
struct GradCheckEntry {
  std::string name;
  double max_rel_error;
};

}  // namespace dualcap
