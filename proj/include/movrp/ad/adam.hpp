#pragma once

#include <cstdint>
#include <vector>

#include "movrp/ad/param_store.hpp"

namespace movrp::ad {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState(const ParamStore& params, AdamConfig config = {});

  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update of the trainable entries. Throws
// NumericError naming the parameter when a gradient is not finite; in that
// case nothing is modified.
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state);

}  // namespace movrp::ad
