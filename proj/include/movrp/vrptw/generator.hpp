#pragma once

#include <cstddef>
#include <cstdint>

#include "movrp/vrptw/instance.hpp"

namespace movrp::vrptw {

inline constexpr double kDepotOpen = 0.0;
inline constexpr double kDepotClose = 10.0;
inline constexpr double kServiceDuration = 0.1;

// Integer demand from a raw normal sample: min(42, max(1, floor|sample|)).
double demand_from_sample(double sample);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Window-opening sampling interval for a customer at travel time
// `depot_distance` from the depot: [d + 0.01, horizon - (d + 0.01) - service].
Interval opening_interval(double depot_distance, double horizon = kDepotClose, double service = kServiceDuration);

// Random instance: unit-square coordinates, N(15, 10) demands clipped to
// [1, 42] and divided by Q, time windows drawn relative to the depot
// distance. Q is 750 / 900 / 1000 for the standard classes and
// `custom_capacity` for SizeClass::Custom. Deterministic in `seed`.
Instance generate_instance(std::size_t customers, std::uint64_t seed, SizeClass size_class,
                           double custom_capacity = 750.0);

}  // namespace movrp::vrptw
