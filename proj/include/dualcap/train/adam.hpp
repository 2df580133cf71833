#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dualcap/tensor/tensor.hpp"

namespace dualcap {

// Bias-corrected Adam over a fixed set of named tensors. step() consumes the
// gradients currently held by each tensor; zeroing them between batches is
// the caller's job.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<std::pair<std::string, Tensor>> params,
                         double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // Throws NumericError naming the tensor if any gradient is non-finite.
  void step(double lr);

  long long step_count() const { return step_count_; }

 private:
  struct Slot {
    std::string name;
    Tensor tensor;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  double beta1_, beta2_, eps_;
  long long step_count_ = 0;
};

}  // namespace dualcap
