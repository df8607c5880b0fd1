#pragma once

#include <span>
#include <string>
#include <vector>

namespace ceci {

// One named parameter tensor and its gradient, viewed as flat doubles.
struct ParamView {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

struct AdamState {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-6;
  // false: decay is an L2 term added to the gradient (default reading).
  // true: decay shrinks the step size, eta_t = lr / (1 + decay * t).
  bool lr_decay_schedule = false;
  long long t = 0;
  std::vector<std::vector<double>> m, v;  // per parameter tensor

  void init(const std::vector<ParamView>& params);
};

// Standard Adam update with bias correction. Refuses the step (throws) on a
// non-finite gradient.
void adam_step(std::vector<ParamView>& params, AdamState& state);

}  // namespace ceci
