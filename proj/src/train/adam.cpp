#include "dualcap/train/adam.hpp"

#include <cmath>

#include "dualcap/common/error.hpp"

namespace dualcap {

AdamOptimizer::AdamOptimizer(std::vector<std::pair<std::string, Tensor>> params,
                             double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  slots_.reserve(params.size());
  for (auto& [name, tensor] : params) {
    tensor.mark_grad_connected();
    Slot slot;
    slot.name = std::move(name);
    slot.m.assign(tensor.numel(), 0.0);
    slot.v.assign(tensor.numel(), 0.0);
    slot.tensor = std::move(tensor);
    slots_.push_back(std::move(slot));
  }
}

void AdamOptimizer::step(double lr) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (Slot& slot : slots_) {
    const std::vector<double>& grad = slot.tensor.grad();
    std::vector<double>& values = slot.tensor.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double g = grad[k];
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in " + slot.name + " at element " +
                           std::to_string(k));
      }
      slot.m[k] = beta1_ * slot.m[k] + (1.0 - beta1_) * g;
      slot.v[k] = beta2_ * slot.v[k] + (1.0 - beta2_) * g * g;
      const double m_hat = slot.m[k] / bc1;
      const double v_hat = slot.v[k] / bc2;
      values[k] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

}  // namespace dualcap
