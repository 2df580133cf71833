#include "dualcap/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace dualcap {

double finite_difference_check(const ScalarFn& f, Tensor x, double eps) {
  if (eps <= 0.0) {
    throw Error("finite_difference_check: eps must be positive");
  }

  const auto eval = [&f, &x]() {
    TapeSuspend no_grad;
    Tensor y = f(x);
    if (y.numel() != 1) {
      throw ShapeError("finite_difference_check: f must be scalar-valued, got shape " +
                       shape_str(y.shape()));
    }
    return y.item();
  };

  const double base1 = eval();
  const double base2 = eval();
  if (base1 != base2) {
    throw Error("finite_difference_check: f is not deterministic (evaluations differ)");
  }

  // Analytic gradient on a fresh tape.
  std::vector<double> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    x.mark_grad_connected();
    x.zero_grad();
    Tensor y = f(x);
    if (y.numel() != 1) {
      throw ShapeError("finite_difference_check: f must be scalar-valued, got shape " +
                       shape_str(y.shape()));
    }
    backward(y);
    analytic = x.grad();
  }

  double max_rel = 0.0;
  auto& xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double saved = xv[i];
    xv[i] = saved + eps;
    const double plus = eval();
    xv[i] = saved - eps;
    const double minus = eval();
    xv[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double rel = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace dualcap
