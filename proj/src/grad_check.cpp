#include "ceci/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ceci/text.hpp"

namespace ceci {

double grad_check(const std::function<double()>& loss,
                  std::vector<GradCheckBlock> blocks, double eps) {
  double worst = 0.0;
  for (auto& block : blocks) {
    if (block.values.size() != block.analytic.size())
      throw Error("grad_check: analytic gradient size mismatch");
    for (size_t i = 0; i < block.values.size(); ++i) {
      const double saved = block.values[i];
      block.values[i] = saved + eps;
      const double up = loss();
      block.values[i] = saved - eps;
      const double down = loss();
      block.values[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double an = block.analytic[i];
      const double rel =
          std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1.0});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace ceci
