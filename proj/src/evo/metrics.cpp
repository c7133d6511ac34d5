#include "movrp/evo/metrics.hpp"

#include <algorithm>

#include "movrp/common/error.hpp"
#include "movrp/common/parallel.hpp"
#include "movrp/policy/rollout.hpp"

namespace movrp::evo {

pareto::ParetoFront PolicyResults::front(std::size_t instance) const {
  const auto& pts = objectives.at(instance);
  std::vector<std::size_t> payloads(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) payloads[p] = p;
  return pareto::ParetoFront(pts, payloads);
}

PolicyResults run_policies(std::span<const ad::ParamStore> policies, const policy::ModelConfig& config,
                           std::span<const vrptw::Instance> instances, std::size_t workers) {
  PolicyResults out;
  out.solutions.assign(instances.size(), std::vector<vrptw::Solution>(policies.size()));
  out.objectives.assign(instances.size(), std::vector<pareto::Fitness>(policies.size()));
  const std::size_t total = instances.size() * policies.size();
  parallel_for(total, workers, [&](std::size_t k) {
    const std::size_t i = k / policies.size(), p = k % policies.size();
    auto r = policy::solve(policies[p], config, instances[i], policy::DecodeMode::Greedy);
    const auto f = vrptw::evaluate_solution(instances[i], r.solution);
    out.solutions[i][p] = std::move(r.solution);
    out.objectives[i][p] = {f.f1, f.f2};
  });
  return out;
}

std::vector<pareto::Fitness> reference_points(const std::vector<std::vector<pareto::Fitness>>& objectives,
                                              double factor) {
  std::vector<pareto::Fitness> refs;
  for (const auto& pts : objectives) {
    if (pts.empty()) throw Error("reference_points: instance without points");
    pareto::Fitness r(pts[0].size(), 0.0);
    for (const auto& p : pts)
      for (std::size_t d = 0; d < r.size(); ++d) r[d] = std::max(r[d], p[d]);
    for (double& v : r) v *= factor;
    refs.push_back(std::move(r));
  }
  return refs;
}

FrontMetrics front_metrics(const std::vector<std::vector<pareto::Fitness>>& objectives,
                           const std::vector<pareto::Fitness>& references) {
  if (objectives.size() != references.size()) throw ShapeError("front_metrics: one reference per instance required");
  FrontMetrics m;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    m.hv.push_back(pareto::hypervolume_2d(objectives[i], references[i]).value);
    m.nds.push_back(pareto::distinct_non_dominated(objectives[i]));
    m.mean_hv += m.hv.back();
    m.mean_nds += static_cast<double>(m.nds.back());
  }
  if (!objectives.empty()) {
    m.mean_hv /= static_cast<double>(objectives.size());
    m.mean_nds /= static_cast<double>(objectives.size());
  }
  return m;
}

}  // namespace movrp::evo
