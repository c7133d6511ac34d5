#include "movrp/vrptw/solution.hpp"

#include <algorithm>
#include <string>

#include "movrp/common/error.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::vrptw {

double route_distance(const Instance& instance, const Route& route) {
  double total = 0.0;
  std::size_t prev = 0;
  for (std::size_t c : route) {
    total += instance.distance(prev, c);
    prev = c;
  }
  return total + instance.distance(prev, 0);
}

std::vector<double> route_distances(const Instance& instance, const Solution& solution) {
  std::vector<double> out;
  out.reserve(solution.routes.size());
  for (const Route& r : solution.routes) out.push_back(route_distance(instance, r));
  return out;
}

ObjectiveVector evaluate_solution(const Instance& instance, const Solution& solution) {
  ObjectiveVector obj;
  for (std::size_t k = 0; k < solution.routes.size(); ++k) {
    const Route& r = solution.routes[k];
    if (r.empty()) throw Error("evaluate_solution: route " + std::to_string(k) + " is empty");
    for (std::size_t c : r)
      if (c == 0 || c >= instance.node_count())
        throw Error("evaluate_solution: bad customer index " + std::to_string(c) + " in route " + std::to_string(k));
    const double c_k = route_distance(instance, r);
    obj.f1 += c_k;
    obj.f2 = std::max(obj.f2, c_k);
  }
  return obj;
}

const char* to_string(Violation v) {
  switch (v) {
    case Violation::None: return "ok";
    case Violation::BadIndex: return "bad-index";
    case Violation::EmptyRoute: return "empty-route";
    case Violation::Duplicate: return "duplicate";
    case Violation::Missing: return "missing";
    case Violation::Capacity: return "capacity";
    case Violation::TimeWindow: return "time-window";
    case Violation::DepotDeadline: return "depot-deadline";
  }
  return "unknown";
}

namespace {

ValidationReport report(Violation v, std::size_t route, std::size_t pos, std::string msg) {
  return ValidationReport{v, route, pos, std::string(to_string(v)) + ": " + msg};
}

}  // namespace

ValidationReport validate_solution(const Instance& instance, const Solution& solution) {
  const std::size_t n = instance.node_count();
  std::vector<int> seen(n, 0);

  for (std::size_t k = 0; k < solution.routes.size(); ++k) {
    const Route& r = solution.routes[k];
    const std::string where = "route " + std::to_string(k);
    if (r.empty()) return report(Violation::EmptyRoute, k, 0, where + " is empty");

    // Same arithmetic, in the same order, as apply_action and the mask.
    double t = instance.start_time();
    double remaining = 1.0;
    std::size_t prev = 0;
    for (std::size_t p = 0; p < r.size(); ++p) {
      const std::size_t c = r[p];
      const std::string at = where + " position " + std::to_string(p);
      if (c == 0 || c >= n) return report(Violation::BadIndex, k, p, at + ": customer index " + std::to_string(c));
      if (seen[c]++) return report(Violation::Duplicate, k, p, at + ": customer " + std::to_string(c) + " repeated");
      const Node& node = instance.nodes[c];
      if (node.demand > remaining + kFeasibilityTol)
        return report(Violation::Capacity, k, p, at + ": load exceeds capacity");
      remaining = std::max(0.0, remaining - node.demand);
      const double arrival = t + instance.distance(prev, c);
      if (arrival > node.tw_close + kFeasibilityTol)
        return report(Violation::TimeWindow, k, p,
                      at + ": arrival " + std::to_string(arrival) + " after window close " + std::to_string(node.tw_close));
      t = std::max(arrival, node.tw_open) + node.service;
      prev = c;
    }
    const double back = t + instance.distance(prev, 0);
    if (back > instance.horizon() + kFeasibilityTol)
      return report(Violation::DepotDeadline, k, r.size(), where + ": returns at " + std::to_string(back));
  }
  for (std::size_t c = 1; c < n; ++c)
    if (!seen[c]) return report(Violation::Missing, 0, 0, "customer " + std::to_string(c) + " not visited");
  return {};
}

}  // namespace movrp::vrptw
