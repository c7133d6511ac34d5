#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "movrp/common/error.hpp"
#include "movrp/common/parallel.hpp"
#include "movrp/harness/commands.hpp"
#include "movrp/harness/config.hpp"
#include "movrp/vrptw/io.hpp"

namespace fs = std::filesystem;
using namespace movrp;

namespace {

struct Common {
  std::string preset = "desk";
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--preset", c.preset, "desk or full")->capture_default_str();
  cmd->add_option("--config", c.config_file, "key=value configuration file");
  cmd->add_option("--set", c.sets, "override one key: --set key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "shortcut for --set seed=N");
}

harness::RunConfig resolve(const Common& c) {
  auto cfg = harness::RunConfig::preset(c.preset);
  if (!c.config_file.empty()) cfg.load_file(c.config_file);
  for (const auto& s : c.sets) cfg.assign(s);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  cfg.validate();
  return cfg;
}

std::vector<double> parse_pair(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("expected two comma-separated numbers, got '" + s + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != 2) throw ConfigError("expected two comma-separated numbers, got '" + s + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiobjective VRPTW: neural policies, evolutionary fine-tuning and baselines"};
  app.require_subcommand(1);
  Common common;

  std::string out, init, policies, instances, reference, out_file;
  std::vector<std::string> population_args, fronts;
  std::optional<std::size_t> count, customers;
  std::optional<std::string> size_class;

  auto* gen = app.add_subcommand("generate", "write random instances and a manifest");
  add_common(gen, common);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--count", count, "number of instances (generate.count)");
  gen->add_option("--customers", customers, "customers per instance (generate.customers)");
  gen->add_option("--size-class", size_class, "50, 80, 100 or custom (generate.size_class)");

  auto* train = app.add_subcommand("train", "train the weight-vector population by REINFORCE");
  add_common(train, common);
  train->add_option("--out", out, "output directory")->required();

  auto* evolve = app.add_subcommand("evolve", "evolutionary fine-tuning of a population");
  add_common(evolve, common);
  evolve->add_option("--init", init, "population directory (from train or evolve)")->required();
  evolve->add_option("--out", out, "output directory")->required();

  auto* solve = app.add_subcommand("solve", "greedy fronts of a population on instances");
  add_common(solve, common);
  solve->add_option("--policies", policies, "population directory")->required();
  solve->add_option("--instances", instances, "instance file or directory")->required();
  solve->add_option("--out", out, "output directory")->required();

  auto* bench = app.add_subcommand("benchmark", "compare algorithms by HV, |NDS| and time");
  add_common(bench, common);
  bench->add_option("--instances", instances, "instance file or directory")->required();
  bench->add_option("--out", out, "output directory")->required();
  bench->add_option("--policies", population_args, "population as label=DIR or DIR (repeatable)");

  auto* metrics = app.add_subcommand("metrics", "HV and |NDS| of front CSV files");
  metrics->add_option("--front", fronts, "front CSV (repeatable)")->required();
  metrics->add_option("--reference", reference, "reference point f1,f2 (default 1.1 x max)");
  metrics->add_option("--out", out_file, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::size_t workers = default_workers();
    if (gen->parsed()) {
      auto cfg = harness::RunConfig::preset(common.preset);
      if (!common.config_file.empty()) cfg.load_file(common.config_file);
      for (const auto& s : common.sets) cfg.assign(s);
      if (common.seed) cfg.set("seed", std::to_string(*common.seed));
      if (count) cfg.set("generate.count", std::to_string(*count));
      if (customers) cfg.set("generate.customers", std::to_string(*customers));
      if (size_class) cfg.set("generate.size_class", *size_class);
      cfg.validate();
      harness::cmd_generate(cfg, out);
    } else if (train->parsed()) {
      harness::cmd_train(resolve(common), out, workers);
    } else if (evolve->parsed()) {
      harness::cmd_evolve(resolve(common), init, out, workers);
    } else if (solve->parsed()) {
      harness::cmd_solve(resolve(common), policies, instances, out, workers);
    } else if (bench->parsed()) {
      std::vector<std::pair<std::string, fs::path>> pops;
      for (const auto& p : population_args) {
        const auto eq = p.find('=');
        if (eq == std::string::npos)
          pops.emplace_back(population_args.size() == 1 ? "policy" : fs::path(p).filename().string(), p);
        else
          pops.emplace_back(p.substr(0, eq), p.substr(eq + 1));
      }
      const auto report = harness::cmd_benchmark(resolve(common), pops, instances, out, workers);
      std::cout << harness::format_summary(report);
    } else if (metrics->parsed()) {
      std::vector<fs::path> paths(fronts.begin(), fronts.end());
      const std::string table = harness::cmd_metrics(paths, reference.empty() ? std::vector<double>{} : parse_pair(reference));
      if (out_file.empty())
        std::cout << table;
      else
        vrptw::write_text_file(out_file, table);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
