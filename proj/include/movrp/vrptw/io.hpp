#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::vrptw {

// {capacity, depot{x, y, a, b, service}, customers[{x, y, a, b, demand,
// service}], seed, size_class, name, coord_scale, time_scale}. `capacity` is
// the raw Q; demands are fractions of it.
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

// {routes: [[indices]], f1, f2}
nlohmann::json solution_to_json(const Instance& instance, const Solution& solution);
Solution solution_from_json(const nlohmann::json& j);

// A file holds one instance object or an array of them.
void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);
std::vector<Instance> load_instances(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace movrp::vrptw
