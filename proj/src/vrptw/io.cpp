#include "movrp/vrptw/io.hpp"

#include <fstream>
#include <sstream>

#include "movrp/common/error.hpp"

namespace movrp::vrptw {

using nlohmann::json;

json instance_to_json(const Instance& instance) {
  const Node& d = instance.depot();
  json customers = json::array();
  for (std::size_t i = 1; i < instance.node_count(); ++i) {
    const Node& n = instance.nodes[i];
    customers.push_back({{"x", n.coords.x}, {"y", n.coords.y}, {"a", n.tw_open}, {"b", n.tw_close},
                         {"demand", n.demand}, {"service", n.service}});
  }
  return json{{"name", instance.name},
              {"capacity", instance.capacity},
              {"size_class", to_string(instance.size_class)},
              {"seed", instance.seed},
              {"coord_scale", instance.coord_scale},
              {"time_scale", instance.time_scale},
              {"depot", {{"x", d.coords.x}, {"y", d.coords.y}, {"a", d.tw_open}, {"b", d.tw_close}, {"service", d.service}}},
              {"customers", std::move(customers)}};
}

Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    inst.capacity = j.at("capacity").get<double>();
    inst.size_class = size_class_from_string(j.value("size_class", std::string("custom")));
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.name = j.value("name", std::string());
    inst.coord_scale = j.value("coord_scale", 1.0);
    inst.time_scale = j.value("time_scale", 1.0);
    const json& d = j.at("depot");
    Node depot;
    depot.coords = {d.at("x").get<double>(), d.at("y").get<double>()};
    depot.tw_open = d.at("a").get<double>();
    depot.tw_close = d.at("b").get<double>();
    depot.service = d.value("service", 0.0);
    inst.nodes.push_back(depot);
    for (const json& c : j.at("customers")) {
      Node n;
      n.coords = {c.at("x").get<double>(), c.at("y").get<double>()};
      n.tw_open = c.at("a").get<double>();
      n.tw_close = c.at("b").get<double>();
      n.demand = c.at("demand").get<double>();
      n.service = c.at("service").get<double>();
      inst.nodes.push_back(n);
    }
    check_instance(inst);
    return inst;
  } catch (const json::exception& e) {
    throw DataError(std::string("instance json: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("instance json: ") + e.what());
  }
}

json solution_to_json(const Instance& instance, const Solution& solution) {
  const ObjectiveVector obj = evaluate_solution(instance, solution);
  return json{{"routes", solution.routes}, {"f1", obj.f1}, {"f2", obj.f2}};
}

Solution solution_from_json(const json& j) {
  try {
    return Solution{j.at("routes").get<std::vector<Route>>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("solution json: ") + e.what());
  }
}

void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
  json arr = json::array();
  for (const Instance& inst : instances) arr.push_back(instance_to_json(inst));
  write_text_file(path, arr.dump(1) + "\n");
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  std::vector<Instance> out;
  if (j.is_array()) {
    for (const json& item : j) out.push_back(instance_from_json(item));
  } else {
    out.push_back(instance_from_json(j));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write " + tmp.string());
      out << text;
      if (!out.flush()) throw DataError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  } catch (const std::filesystem::filesystem_error& e) {
    throw DataError("cannot write " + path.string() + ": " + e.what());
  }
}

}  // namespace movrp::vrptw
