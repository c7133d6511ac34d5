#include "movrp/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "movrp/common/error.hpp"

namespace movrp::ad {

namespace {

double evaluate(const ScalarGraph& f, const ParamStore& params) {
  Tape tape(false);
  const double v = f(tape, params).item();
  if (!std::isfinite(v)) throw NumericError("finite_difference_check: objective is not finite");
  return v;
}

}  // namespace

GradCheckResult finite_difference_check(const ScalarGraph& f, const ParamStore& params,
                                        const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw Error("finite_difference_check: step must be positive");
  if (!(options.denominator_floor > 0.0)) throw Error("finite_difference_check: denominator_floor must be positive");

  ParamStore analytic;
  {
    Tape tape(true);
    Tensor out = f(tape, params);
    if (!std::isfinite(out.item())) throw NumericError("finite_difference_check: objective is not finite");
    analytic = tape.backward(out, params);
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (!params[s].trainable) continue;
    for (std::size_t k = 0; k < params[s].values.size(); ++k) coords.emplace_back(s, k);
  }
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  ParamStore probe = params;
  for (const auto& [slot, k] : coords) {
    double& x = probe[slot].values[k];
    const double original = x;
    x = original + options.step;
    const double up = evaluate(f, probe);
    x = original - options.step;
    const double down = evaluate(f, probe);
    x = original;

    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[slot].values[k];
    const double err = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), options.denominator_floor);
    ++result.coords_checked;
    if (err > result.max_rel_error || result.coords_checked == 1) {
      result.max_rel_error = err;
      result.worst_param = params[slot].name;
      result.worst_index = k;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace movrp::ad
