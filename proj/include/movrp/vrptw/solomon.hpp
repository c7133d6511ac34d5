#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "movrp/vrptw/instance.hpp"

namespace movrp::vrptw {

struct SolomonNode {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  double ready = 0.0;
  double due = 0.0;
  double service = 0.0;
};

// Values as printed in the benchmark file; nodes sorted by id, node 0 the depot.
struct SolomonInstance {
  std::string name;
  int vehicles = 0;
  double capacity = 0.0;
  std::vector<SolomonNode> nodes;

  std::size_t customer_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

// Throws DataError with a line number on malformed input.
SolomonInstance parse_solomon(std::string_view text);
SolomonInstance load_solomon(const std::filesystem::path& path);

// Coordinates divided by the largest coordinate, times (and service) scaled
// by 10 / depot due time, demands divided by capacity. Throws DataError on a
// zero horizon or coordinate range, and when some customer cannot be served
// even by a dedicated vehicle after scaling.
Instance normalize_solomon(const SolomonInstance& raw);

// Inverse of normalize_solomon using the scale factors stored on `instance`.
// The vehicle count is not part of Instance and comes back as 0.
SolomonInstance denormalize_solomon(const Instance& instance);

}  // namespace movrp::vrptw
