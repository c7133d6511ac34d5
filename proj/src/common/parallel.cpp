#include "movrp/common/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp {

std::size_t default_workers() {
  const char* env = std::getenv("MOVRP_WORKERS");
  if (!env || !*env) return std::max(1u, std::thread::hardware_concurrency());
  try {
    const long v = std::stol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("MOVRP_WORKERS must be a positive integer, got '") + env + "'");
}

}  // namespace movrp
