#include "movrp/vrptw/instance.hpp"

#include <cmath>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::vrptw {

double capacity_for(SizeClass size_class) {
  switch (size_class) {
    case SizeClass::N50: return 750.0;
    case SizeClass::N80: return 900.0;
    case SizeClass::N100: return 1000.0;
    case SizeClass::Custom: break;
  }
  throw ConfigError("capacity_for: custom size class has no fixed capacity");
}

std::string to_string(SizeClass size_class) {
  switch (size_class) {
    case SizeClass::N50: return "50";
    case SizeClass::N80: return "80";
    case SizeClass::N100: return "100";
    case SizeClass::Custom: return "custom";
  }
  return "custom";
}

SizeClass size_class_from_string(std::string_view text) {
  if (text == "50") return SizeClass::N50;
  if (text == "80") return SizeClass::N80;
  if (text == "100") return SizeClass::N100;
  if (text == "custom") return SizeClass::Custom;
  throw ConfigError("unknown size class '" + std::string(text) + "' (expected 50, 80, 100 or custom)");
}

void check_instance(const Instance& instance) {
  if (instance.nodes.size() < 2) throw DataError("instance needs a depot and at least one customer");
  if (!(instance.capacity > 0.0) || !std::isfinite(instance.capacity))
    throw DataError("instance capacity must be positive");
  const Node& depot = instance.nodes[0];
  if (!(depot.tw_open < depot.tw_close)) throw DataError("depot window must satisfy a_0 < b_0");
  if (depot.demand != 0.0) throw DataError("depot demand must be 0");
  for (std::size_t i = 0; i < instance.nodes.size(); ++i) {
    const Node& n = instance.nodes[i];
    const std::string where = "node " + std::to_string(i) + ": ";
    for (double v : {n.coords.x, n.coords.y, n.tw_open, n.tw_close, n.demand, n.service})
      if (!std::isfinite(v)) throw DataError(where + "non-finite value");
    if (n.tw_open > n.tw_close) throw DataError(where + "window opens after it closes");
    if (n.demand < 0.0) throw DataError(where + "negative demand");
    if (n.demand > 1.0) throw DataError(where + "demand exceeds vehicle capacity");
    if (n.service < 0.0) throw DataError(where + "negative service time");
  }
}

}  // namespace movrp::vrptw
