#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "movrp/harness/config.hpp"
#include "movrp/pareto/pareto.hpp"
#include "movrp/vrptw/instance.hpp"

namespace movrp::harness {

struct NamedInstance {
  std::string name;
  vrptw::Instance instance;
};

// A JSON file (one instance or an array), a Solomon text file, or a
// directory. A directory with manifest.json is read in manifest order;
// otherwise every .json and .txt file in name order.
std::vector<NamedInstance> load_instance_inputs(const std::filesystem::path& path);

// config.txt with the resolved configuration.
void echo_config(const std::filesystem::path& dir, const RunConfig& config);

// instance_NNNN.json files seeded by derive_seed(seed, i) plus manifest.json.
void cmd_generate(const RunConfig& config, const std::filesystem::path& out);

// Checkpoints, train_log.csv and population.json.
void cmd_train(const RunConfig& config, const std::filesystem::path& out, std::size_t workers);

// Reads the population in `init` and writes the evolved one to `out`.
void cmd_evolve(const RunConfig& config, const std::filesystem::path& init, const std::filesystem::path& out,
                std::size_t workers);

// Per instance: <name>.front.csv (f1,f2,policy_index) and
// <name>.solutions.json for the non-dominated greedy solutions of all policies.
void cmd_solve(const RunConfig& config, const std::filesystem::path& policies, const std::filesystem::path& instances,
               const std::filesystem::path& out, std::size_t workers);

struct BenchmarkRow {
  std::string instance;
  std::string algorithm;
  double hv = 0.0;
  std::size_t nds = 0;
  double seconds = 0.0;
  pareto::Fitness reference;
};

struct BenchmarkSummary {
  std::string algorithm;
  double hv_mean = 0.0, hv_std = 0.0;
  double nds_mean = 0.0, nds_std = 0.0;
  double time_mean = 0.0, time_std = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSummary> summary;
  std::uint64_t seed = 0;
};

// Runs the configured algorithms on every instance. "policy" expands to one
// entry per (label, population directory) in `populations`. Writes
// fronts/<algorithm>/<instance>.csv and report.csv; fronts do not depend on
// timing, report.csv carries wall-clock seconds.
BenchmarkReport cmd_benchmark(const RunConfig& config,
                              const std::vector<std::pair<std::string, std::filesystem::path>>& populations,
                              const std::filesystem::path& instances, const std::filesystem::path& out,
                              std::size_t workers);
std::string format_summary(const BenchmarkReport& report);

// HV and |NDS| of each front file; the reference defaults to 1.1 times the
// coordinate-wise maximum over all files.
std::string cmd_metrics(const std::vector<std::filesystem::path>& fronts, const std::vector<double>& reference);

// First two columns of a front CSV with a header line.
std::vector<pareto::Fitness> read_front_csv(const std::filesystem::path& path);

}  // namespace movrp::harness
