#include "ceci/adam.hpp"

#include <cmath>

#include "ceci/text.hpp"

namespace ceci {

void AdamState::init(const std::vector<ParamView>& params) {
  m.clear();
  v.clear();
  t = 0;
  for (const auto& p : params) {
    m.emplace_back(p.value.size(), 0.0);
    v.emplace_back(p.value.size(), 0.0);
  }
}

void adam_step(std::vector<ParamView>& params, AdamState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error("adam_step: state not initialized for this parameter list");
  for (const auto& p : params) {
    if (p.value.size() != p.grad.size())
      throw Error("adam_step: '" + p.name + "': value/grad size mismatch");
    for (double g : p.grad)
      if (!std::isfinite(g))
        throw Error("adam_step: non-finite gradient in '" + p.name + "', step refused");
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  double lr = state.learning_rate;
  double l2 = state.weight_decay;
  if (state.lr_decay_schedule) {
    lr = state.learning_rate / (1.0 + state.weight_decay * static_cast<double>(state.t));
    l2 = 0.0;
  }

  for (size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (state.m[k].size() != p.value.size())
      throw Error("adam_step: '" + p.name + "': shape changed since init");
    for (size_t i = 0; i < p.value.size(); ++i) {
      double g = p.grad[i] + l2 * p.value[i];
      state.m[k][i] = state.beta1 * state.m[k][i] + (1.0 - state.beta1) * g;
      state.v[k][i] = state.beta2 * state.v[k][i] + (1.0 - state.beta2) * g * g;
      double mhat = state.m[k][i] / bc1;
      double vhat = state.v[k][i] / bc2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace ceci
