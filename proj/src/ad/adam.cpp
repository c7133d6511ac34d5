#include "movrp/ad/adam.hpp"

#include <cmath>

#include "movrp/common/error.hpp"

namespace movrp::ad {

AdamState::AdamState(const ParamStore& params, AdamConfig cfg) : config(cfg) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const auto& p : params) {
    first_moment.emplace_back(p.values.size(), 0.0);
    second_moment.emplace_back(p.values.size(), 0.0);
  }
}

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state) {
  if (!params.same_layout(grads) || state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: gradient or optimizer state does not match parameters");
  }
  for (std::size_t s = 0; s < grads.size(); ++s) {
    if (!params[s].trainable) continue;
    for (double g : grads[s].values) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient for parameter '" + grads[s].name + "'");
    }
  }

  state.step += 1;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (!params[s].trainable) continue;
    auto& theta = params[s].values;
    auto& m = state.first_moment[s];
    auto& v = state.second_moment[s];
    const auto& g = grads[s].values;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      theta[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace movrp::ad
