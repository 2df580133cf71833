#include "dualcap/train/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "dualcap/common/error.hpp"

namespace dualcap {

double scheduled_sampling_prob(int epoch, double increment, int every_epochs, double cap) {
  if (epoch < 0) throw Error("scheduled_sampling_prob: negative epoch");
  if (every_epochs < 1) throw Error("scheduled_sampling_prob: period must be >= 1");
  return std::min(cap, increment * (epoch / every_epochs));
}

double learning_rate(int epoch, double initial, double decay_factor, int every_epochs) {
  if (epoch < 0) throw Error("learning_rate: negative epoch");
  if (every_epochs < 1) throw Error("learning_rate: period must be >= 1");
  return initial * std::pow(decay_factor, epoch / every_epochs);
}

}  // namespace dualcap
