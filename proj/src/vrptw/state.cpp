#include "movrp/vrptw/state.hpp"

#include <algorithm>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::vrptw {

VehicleState fresh_vehicle(const Instance& instance, std::size_t vehicle_index) {
  VehicleState v;
  v.vehicle_index = vehicle_index;
  v.position = 0;
  v.current_time = instance.start_time();
  v.remaining_capacity = 1.0;
  return v;
}

bool can_serve(const Instance& instance, const VehicleState& vehicle, std::size_t customer) {
  const Node& n = instance.nodes[customer];
  if (n.demand > vehicle.remaining_capacity + kFeasibilityTol) return false;
  const double arrival = vehicle.current_time + instance.distance(vehicle.position, customer);
  if (arrival > n.tw_close + kFeasibilityTol) return false;
  const double depart = std::max(arrival, n.tw_open) + n.service;
  return depart + instance.distance(customer, 0) <= instance.horizon() + kFeasibilityTol;
}

Mask feasible_mask(const Instance& instance, const VehicleState& vehicle, const std::vector<std::uint8_t>& visited) {
  const std::size_t n = instance.node_count();
  Mask mask(n, 0);
  bool any = false;
  for (std::size_t i = 1; i < n; ++i) {
    if (visited[i] || !can_serve(instance, vehicle, i)) continue;
    mask[i] = 1;
    any = true;
  }
  mask[0] = (vehicle.position != 0 || !any) ? 1 : 0;
  return mask;
}

VehicleState apply_action(const Instance& instance, const VehicleState& vehicle,
                          const std::vector<std::uint8_t>& visited, std::size_t node) {
  if (node >= instance.node_count()) throw Error("apply_action: node " + std::to_string(node) + " out of range");
  if (!feasible_mask(instance, vehicle, visited)[node])
    throw Error("apply_action: node " + std::to_string(node) + " is masked for vehicle " +
                std::to_string(vehicle.vehicle_index));
  if (node == 0) return fresh_vehicle(instance, vehicle.vehicle_index + 1);
  return advance(instance, vehicle, node);
}

VehicleState advance(const Instance& instance, const VehicleState& vehicle, std::size_t node) {
  const Node& c = instance.nodes[node];
  VehicleState next = vehicle;
  const double leg = instance.distance(vehicle.position, node);
  next.current_time = std::max(vehicle.current_time + leg, c.tw_open) + c.service;
  next.remaining_capacity = std::max(0.0, vehicle.remaining_capacity - c.demand);
  next.route_distance = vehicle.route_distance + leg;
  next.position = node;
  next.return_distance = instance.distance(node, 0);
  return next;
}

RoutingState::RoutingState(const Instance& instance)
    : instance_(&instance),
      vehicle_(fresh_vehicle(instance)),
      visited_(instance.node_count(), 0) {
  visited_[0] = 1;
}

std::size_t RoutingState::step_budget() const { return 2 * (instance_->customer_count() + 1) + 2; }

bool RoutingState::done() const { return served_ == instance_->customer_count() && vehicle_.position == 0; }

std::size_t RoutingState::feasible_count() const {
  const Mask m = mask();
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

void RoutingState::apply(std::size_t node) {
  if (done()) throw Error("RoutingState::apply: episode already complete");
  if (steps_ >= step_budget()) throw Error("RoutingState::apply: step budget exhausted");
  if (node == 0 && vehicle_.position == 0) {
    // Only reachable when no remaining customer is servable from the depot.
    std::string ids;
    for (std::size_t i = 1; i < visited_.size(); ++i)
      if (!visited_[i]) ids += (ids.empty() ? "" : ",") + std::to_string(i);
    throw DataError("instance infeasible: customers {" + ids + "} cannot be served by a fresh vehicle");
  }
  VehicleState next = apply_action(*instance_, vehicle_, visited_, node);
  ++steps_;
  last_action_ = node;
  if (node == 0) {
    VehicleState closed = vehicle_;
    closed.route_distance += closed.return_distance;
    closed.current_time += closed.return_distance;
    closed.position = 0;
    closed.return_distance = 0.0;
    closed_.push_back(closed);
    routes_.push_back(std::move(current_));
    current_.clear();
  } else {
    visited_[node] = 1;
    ++served_;
    current_.push_back(node);
  }
  vehicle_ = next;
}

Solution RoutingState::solution() const {
  if (!done()) throw Error("RoutingState::solution: episode is not complete");
  return Solution{routes_};
}

}  // namespace movrp::vrptw
