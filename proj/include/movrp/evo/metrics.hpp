#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "movrp/ad/param_store.hpp"
#include "movrp/pareto/pareto.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::evo {

// Greedy solutions of every policy on every instance: [instance][policy].
struct PolicyResults {
  std::vector<std::vector<vrptw::Solution>> solutions;
  std::vector<std::vector<pareto::Fitness>> objectives;

  // Front of instance i; payloads are policy indices.
  pareto::ParetoFront front(std::size_t instance) const;
};

PolicyResults run_policies(std::span<const ad::ParamStore> policies, const policy::ModelConfig& config,
                           std::span<const vrptw::Instance> instances, std::size_t workers = 1);

// Per instance, `factor` times the coordinate-wise max over the points.
std::vector<pareto::Fitness> reference_points(const std::vector<std::vector<pareto::Fitness>>& objectives,
                                              double factor = 1.1);

struct FrontMetrics {
  std::vector<double> hv;
  std::vector<std::size_t> nds;
  double mean_hv = 0.0;
  double mean_nds = 0.0;
};

// HV and number of distinct non-dominated points of each instance's point
// set, with its own reference point.
FrontMetrics front_metrics(const std::vector<std::vector<pareto::Fitness>>& objectives,
                           const std::vector<pareto::Fitness>& references);

}  // namespace movrp::evo
