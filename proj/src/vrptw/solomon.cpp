#include "movrp/vrptw/solomon.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "movrp/common/error.hpp"
#include "movrp/vrptw/io.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::vrptw {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool to_number(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

[[noreturn]] void fail(std::size_t line, std::size_t last_good, const std::string& what) {
  throw DataError("solomon line " + std::to_string(line) + ": " + what + " (last good line " +
                  std::to_string(last_good) + ")");
}

}  // namespace

SolomonInstance parse_solomon(std::string_view text) {
  enum class Stage { Name, Header, Fleet, Table, Rows };
  SolomonInstance out;
  Stage stage = Stage::Name;
  std::size_t line_no = 0, last_good = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;

    switch (stage) {
      case Stage::Name:
        out.name = std::string(fields[0]);
        stage = Stage::Header;
        break;
      case Stage::Header:
        if (line.find("CAPACITY") != std::string_view::npos) stage = Stage::Fleet;
        break;
      case Stage::Fleet: {
        double vehicles = 0, capacity = 0;
        if (fields.size() != 2 || !to_number(fields[0], vehicles) || !to_number(fields[1], capacity))
          fail(line_no, last_good, "expected vehicle count and capacity");
        if (!(capacity > 0)) fail(line_no, last_good, "capacity must be positive");
        out.vehicles = static_cast<int>(vehicles);
        out.capacity = capacity;
        stage = Stage::Table;
        break;
      }
      case Stage::Table:
        if (fields[0] == "CUST") stage = Stage::Rows;
        break;
      case Stage::Rows: {
        double v[7];
        if (fields.size() != 7) fail(line_no, last_good, "expected 7 columns, found " + std::to_string(fields.size()));
        for (int k = 0; k < 7; ++k)
          if (!to_number(fields[k], v[k])) fail(line_no, last_good, "bad number '" + std::string(fields[k]) + "'");
        if (v[0] < 0 || v[0] != std::floor(v[0])) fail(line_no, last_good, "bad customer id");
        out.nodes.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]});
        break;
      }
    }
    last_good = line_no;
  }

  if (stage != Stage::Rows) fail(line_no, last_good, "truncated before the customer table");
  if (out.nodes.empty()) fail(line_no, last_good, "no node rows");

  std::stable_sort(out.nodes.begin(), out.nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (out.nodes[0].id != 0) throw DataError("solomon: missing depot row (id 0)");
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    if (out.nodes[i].id != static_cast<int>(i))
      throw DataError("solomon: node ids are not contiguous (expected " + std::to_string(i) + ", found " +
                      std::to_string(out.nodes[i].id) + ")");
  if (out.nodes.size() < 2) throw DataError("solomon: no customers");
  return out;
}

SolomonInstance load_solomon(const std::filesystem::path& path) {
  SolomonInstance s = parse_solomon(read_text_file(path));
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

Instance normalize_solomon(const SolomonInstance& raw) {
  if (raw.nodes.size() < 2) throw DataError("normalize_solomon: no customers");
  const double horizon = raw.nodes[0].due;
  if (!(horizon > 0)) throw DataError("normalize_solomon: zero horizon");
  double max_coord = 0;
  for (const auto& n : raw.nodes) max_coord = std::max({max_coord, n.x, n.y});
  if (!(max_coord > 0)) throw DataError("normalize_solomon: all coordinates are zero");

  Instance inst;
  inst.name = raw.name;
  inst.capacity = raw.capacity;
  inst.size_class = SizeClass::Custom;
  inst.coord_scale = 1.0 / max_coord;
  inst.time_scale = 10.0 / horizon;
  for (const auto& r : raw.nodes) {
    Node n;
    n.coords = {r.x / max_coord, r.y / max_coord};
    n.tw_open = r.ready * 10.0 / horizon;
    n.tw_close = r.due * 10.0 / horizon;
    n.service = r.service * 10.0 / horizon;
    n.demand = r.demand / raw.capacity;
    inst.nodes.push_back(n);
  }
  check_instance(inst);

  // Coordinates and times are scaled by different factors, so a customer
  // reachable in the raw data may be unreachable afterwards.
  const VehicleState v = fresh_vehicle(inst);
  std::string bad;
  for (std::size_t i = 1; i < inst.node_count(); ++i)
    if (!can_serve(inst, v, i)) bad += (bad.empty() ? "" : ",") + std::to_string(i);
  if (!bad.empty())
    throw DataError("normalize_solomon: " + raw.name + ": customers {" + bad +
                    "} cannot be served by a dedicated vehicle after scaling");
  return inst;
}

SolomonInstance denormalize_solomon(const Instance& instance) {
  SolomonInstance out;
  out.name = instance.name;
  out.capacity = instance.capacity;
  for (std::size_t i = 0; i < instance.node_count(); ++i) {
    const Node& n = instance.nodes[i];
    out.nodes.push_back({static_cast<int>(i), n.coords.x / instance.coord_scale, n.coords.y / instance.coord_scale,
                         n.demand * instance.capacity, n.tw_open / instance.time_scale,
                         n.tw_close / instance.time_scale, n.service / instance.time_scale});
  }
  return out;
}

}  // namespace movrp::vrptw
