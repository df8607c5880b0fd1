#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ceci {

// One block of scalars to perturb, paired with the analytic gradient the
// implementation claims for them.
struct GradCheckBlock {
  std::span<double> values;
  std::span<const double> analytic;
};

// Central finite differences over every entry of every block. `loss` must
// re-evaluate the scalar objective from the current contents of the blocks
// and be free of fresh randomness (freeze dropout masks first). Returns the
// worst relative error, |fd - analytic| / max(|fd|, |analytic|, 1).
double grad_check(const std::function<double()>& loss,
                  std::vector<GradCheckBlock> blocks, double eps = 1e-5);

}  // namespace ceci
