#include "movrp/vrptw/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::vrptw {

double demand_from_sample(double sample) {
  return std::min(42.0, std::max(1.0, std::floor(std::abs(sample))));
}

Interval opening_interval(double depot_distance, double horizon, double service) {
  const double h = depot_distance + 0.01;
  return {h, horizon - h - service};
}

Instance generate_instance(std::size_t customers, std::uint64_t seed, SizeClass size_class,
                           double custom_capacity) {
  if (customers == 0) throw ConfigError("generate_instance: need at least one customer");
  const double q = size_class == SizeClass::Custom ? custom_capacity : capacity_for(size_class);
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("generate_instance: capacity must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> demand_noise(15.0, 10.0);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  Instance inst;
  inst.capacity = q;
  inst.size_class = size_class;
  inst.seed = seed;
  inst.name = "gen-" + std::to_string(customers) + "-" + std::to_string(seed);
  inst.nodes.resize(customers + 1);

  for (Node& n : inst.nodes) {
    n.coords.x = unit(rng);
    n.coords.y = unit(rng);
  }
  Node& depot = inst.nodes[0];
  depot.tw_open = kDepotOpen;
  depot.tw_close = kDepotClose;

  for (std::size_t i = 1; i <= customers; ++i) inst.nodes[i].demand = demand_from_sample(demand_noise(rng)) / q;

  for (std::size_t i = 1; i <= customers; ++i) {
    Node& n = inst.nodes[i];
    n.service = kServiceDuration;
    const Interval iv = opening_interval(inst.distance(0, i), kDepotClose, kServiceDuration);
    if (iv.lo > iv.hi)
      throw DataError("generate_instance: empty window interval for customer " + std::to_string(i));
    n.tw_open = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
    const double alpha = std::max(std::abs(std_normal(rng)), 0.01);
    n.tw_close = std::min(n.tw_open + 3.0 * alpha, iv.hi);
  }
  return inst;
}

}  // namespace movrp::vrptw
