#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "movrp/ad/param_store.hpp"
#include "movrp/ad/tensor.hpp"

namespace movrp::ad {

// Builds a scalar on `tape` from `params`. Must be deterministic in params.
using ScalarGraph = std::function<Tensor(Tape& tape, const ParamStore& params)>;

struct GradCheckOptions {
  double step = 1e-5;
  // 0 checks every trainable coordinate; otherwise a seeded uniform sample.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  // Lower bound on the error denominator. Central differences carry round-off
  // of order 1e-16 * |f| / step, so coordinates whose true gradient is exactly
  // zero (a bias feeding batch norm, say) would otherwise score ~1 on noise.
  double denominator_floor = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares backward() against central differences. Per coordinate the error
// is |analytic - numeric| / max(|analytic| + |numeric|, denominator_floor);
// the maximum is reported. Throws NumericError if f is not finite at any evaluated point.
GradCheckResult finite_difference_check(const ScalarGraph& f, const ParamStore& params,
                                        const GradCheckOptions& options = {});

}  // namespace movrp::ad
