#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "movrp/vrptw/instance.hpp"

namespace movrp::vrptw {

using Route = std::vector<std::size_t>;

// Customer sequences; the depot is implicit at both ends of each route.
struct Solution {
  std::vector<Route> routes;
};

struct ObjectiveVector {
  double f1 = 0.0;  // total distance
  double f2 = 0.0;  // makespan: longest single route
};

double route_distance(const Instance& instance, const Route& route);
std::vector<double> route_distances(const Instance& instance, const Solution& solution);

// Throws Error on an empty route or an out-of-range customer index.
ObjectiveVector evaluate_solution(const Instance& instance, const Solution& solution);

enum class Violation { None, BadIndex, EmptyRoute, Duplicate, Missing, Capacity, TimeWindow, DepotDeadline };

const char* to_string(Violation v);

struct ValidationReport {
  Violation violation = Violation::None;
  std::size_t route = 0;
  std::size_t position = 0;
  std::string message;

  bool ok() const { return violation == Violation::None; }
};

// Reports the first violation found, scanning routes in order.
ValidationReport validate_solution(const Instance& instance, const Solution& solution);

}  // namespace movrp::vrptw
