#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::vrptw {

using Mask = std::vector<std::uint8_t>;

// Slack granted to time and capacity comparisons. validate_solution uses the
// same slack, and both recompute times in the same order, so anything the
// mask lets through validates.
inline constexpr double kFeasibilityTol = 1e-9;

struct VehicleState {
  std::size_t vehicle_index = 1;
  std::size_t position = 0;
  double current_time = 0.0;
  double remaining_capacity = 1.0;
  double route_distance = 0.0;
  double return_distance = 0.0;
};

VehicleState fresh_vehicle(const Instance& instance, std::size_t vehicle_index = 1);

// Whether customer i could be served next by `vehicle`, ignoring whether it
// has been visited already.
bool can_serve(const Instance& instance, const VehicleState& vehicle, std::size_t customer);

// 1 = pass, 0 = blocked, one entry per node (depot first). The depot is
// blocked while the vehicle sits at the depot on an empty route, unless every
// customer is blocked.
Mask feasible_mask(const Instance& instance, const VehicleState& vehicle, const std::vector<std::uint8_t>& visited);

// Next state after moving to `node`. Choosing the depot closes the route and
// returns a fresh vehicle with the next index. Throws Error if `node` is
// masked out.
VehicleState apply_action(const Instance& instance, const VehicleState& vehicle,
                          const std::vector<std::uint8_t>& visited, std::size_t node);

// Moves `vehicle` to customer `node` without any feasibility check: waits
// for the window to open, serves, and updates load and distances.
VehicleState advance(const Instance& instance, const VehicleState& vehicle, std::size_t node);

// A whole construction episode: the current vehicle, the routes built so far
// and the final states of closed vehicles.
class RoutingState {
 public:
  explicit RoutingState(const Instance& instance);

  const Instance& instance() const { return *instance_; }
  const VehicleState& vehicle() const { return vehicle_; }
  // Final state of each closed vehicle: back at the depot, return leg added.
  const std::vector<VehicleState>& closed_vehicles() const { return closed_; }
  const std::vector<std::uint8_t>& visited() const { return visited_; }
  const std::vector<std::size_t>& current_route() const { return current_; }
  const std::vector<std::vector<std::size_t>>& closed_routes() const { return routes_; }

  std::optional<std::size_t> last_action() const { return last_action_; }
  std::size_t served() const { return served_; }
  std::size_t steps() const { return steps_; }
  // Upper bound on decoding steps: 2(N + 1) + 2.
  std::size_t step_budget() const;
  bool done() const;

  Mask mask() const { return feasible_mask(*instance_, vehicle_, visited_); }
  // Number of nodes passing the mask.
  std::size_t feasible_count() const;

  // Throws Error on a masked node or when the step budget is exhausted, and
  // DataError when a fresh vehicle cannot reach any remaining customer.
  void apply(std::size_t node);

  // Complete solutions only.
  Solution solution() const;

 private:
  const Instance* instance_;
  VehicleState vehicle_;
  std::vector<VehicleState> closed_;
  std::vector<std::uint8_t> visited_;
  std::vector<std::size_t> current_;
  std::vector<std::vector<std::size_t>> routes_;
  std::optional<std::size_t> last_action_;
  std::size_t served_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace movrp::vrptw
