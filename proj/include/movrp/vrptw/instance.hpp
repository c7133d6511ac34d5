#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace movrp::vrptw {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Node {
  Point coords;
  double tw_open = 0.0;   // a_i
  double tw_close = 0.0;  // b_i
  double demand = 0.0;    // fraction of vehicle capacity
  double service = 0.0;   // w
};

enum class SizeClass { N50, N80, N100, Custom };

// Vehicle capacity used by the generator for the three standard sizes.
double capacity_for(SizeClass size_class);
std::string to_string(SizeClass size_class);
SizeClass size_class_from_string(std::string_view text);

// Depot is node 0. Travel time equals Euclidean distance. Demands are stored
// as fractions of the vehicle capacity, so every vehicle starts with 1.0;
// `capacity` keeps the raw Q for reporting and file output.
struct Instance {
  std::vector<Node> nodes;
  double capacity = 1.0;
  SizeClass size_class = SizeClass::Custom;
  std::uint64_t seed = 0;
  std::string name;
  // Factors applied by normalize_solomon (normalized = raw * scale); 1 for
  // generated data. Kept so objectives can be reported in raw units.
  double coord_scale = 1.0;
  double time_scale = 1.0;

  std::size_t customer_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  std::size_t node_count() const { return nodes.size(); }
  const Node& depot() const { return nodes.front(); }
  double horizon() const { return nodes.front().tw_close; }
  double start_time() const { return nodes.front().tw_open; }

  double distance(std::size_t i, std::size_t j) const {
    const double dx = nodes[i].coords.x - nodes[j].coords.x;
    const double dy = nodes[i].coords.y - nodes[j].coords.y;
    return std::sqrt(dx * dx + dy * dy);
  }
};

// Throws DataError when a structural invariant is broken (a_i > b_i, negative
// demand or demand above 1, depot with demand, no nodes, a_0 >= b_0,
// non-positive capacity, non-finite values).
void check_instance(const Instance& instance);

}  // namespace movrp::vrptw
