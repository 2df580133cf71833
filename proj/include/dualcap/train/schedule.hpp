#pragma once

namespace dualcap {

// Step schedules: sampling probability grows 5 points every 5 epochs up to a
// 25% cap; the learning rate loses 20% every 3 epochs from 5e-4. Both are
// pure step functions of the epoch.
double scheduled_sampling_prob(int epoch, double increment = 0.05, int every_epochs = 5,
                               double cap = 0.25);

double learning_rate(int epoch, double initial = 5e-4, double decay_factor = 0.8,
                     int every_epochs = 3);

}  // namespace dualcap
