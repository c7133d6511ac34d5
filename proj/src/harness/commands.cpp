#include "movrp/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "movrp/baselines/baselines.hpp"
#include "movrp/common/error.hpp"
#include "movrp/common/random.hpp"
#include "movrp/evo/evolve.hpp"
#include "movrp/evo/metrics.hpp"
#include "movrp/policy/checkpoint.hpp"
#include "movrp/train/trainer.hpp"
#include "movrp/vrptw/generator.hpp"
#include "movrp/vrptw/io.hpp"
#include "movrp/vrptw/solomon.hpp"

namespace movrp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<NamedInstance> load_file(const fs::path& file) {
  std::vector<NamedInstance> out;
  const std::string stem = file.stem().string();
  if (file.extension() == ".json") {
    const auto list = vrptw::load_instances(file);
    for (std::size_t i = 0; i < list.size(); ++i) {
      char suffix[24];
      std::snprintf(suffix, sizeof suffix, "_%04zu", i);
      out.push_back({list.size() == 1 ? stem : stem + suffix, list[i]});
    }
  } else {
    const auto raw = vrptw::load_solomon(file);
    out.push_back({stem, vrptw::normalize_solomon(raw)});
  }
  return out;
}

void check_model(const RunConfig& config, const policy::ModelConfig& stored, const fs::path& where) {
  if (policy::to_json(config.model()) != policy::to_json(stored))
    throw ConfigError("model settings in the configuration differ from the checkpoints in " + where.string() +
                      " (stored: " + policy::to_json(stored).dump() + ")");
}

std::vector<ad::ParamStore> population_params(const evo::LoadedPopulation& pop) {
  std::vector<ad::ParamStore> out;
  for (const auto& ind : pop.individuals) out.push_back(ind.params);
  return out;
}

std::string front_csv(const pareto::ParetoFront& front, const char* payload_column) {
  std::string s = std::string("f1,f2,") + payload_column + "\n";
  for (const auto& e : front.entries()) s += g17(e.f1) + "," + g17(e.f2) + "," + std::to_string(e.payload) + "\n";
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<NamedInstance> load_instance_inputs(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("instance input " + path.string() + " does not exist");
  if (!fs::is_directory(path)) return load_file(path);

  std::vector<NamedInstance> out;
  const fs::path manifest = path / "manifest.json";
  if (fs::exists(manifest)) {
    json m;
    try {
      m = json::parse(vrptw::read_text_file(manifest));
      for (const auto& f : m.at("files")) {
        auto part = load_file(path / f.at("file").get<std::string>());
        out.insert(out.end(), part.begin(), part.end());
      }
    } catch (const json::exception& e) {
      throw DataError("instance manifest " + manifest.string() + ": " + e.what());
    }
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if ((ext == ".json" || ext == ".txt") && e.path().filename() != "config.txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto part = load_file(f);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void echo_config(const fs::path& dir, const RunConfig& config) {
  vrptw::write_text_file(dir / "config.txt", config.to_text());
}

void cmd_generate(const RunConfig& config, const fs::path& out) {
  const GenerateSettings g = config.generate();
  json manifest;
  manifest["seed"] = g.seed;
  manifest["customers"] = g.customers;
  manifest["size_class"] = vrptw::to_string(g.size_class);
  manifest["capacity"] = g.size_class == vrptw::SizeClass::Custom ? g.custom_capacity : vrptw::capacity_for(g.size_class);
  manifest["count"] = g.count;
  manifest["files"] = json::array();
  for (std::size_t i = 0; i < g.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "instance_%04zu", i);
    const std::uint64_t seed = derive_seed(g.seed, i);
    auto inst = vrptw::generate_instance(g.customers, seed, g.size_class, g.custom_capacity);
    inst.name = name;
    vrptw::save_instances(out / (std::string(name) + ".json"), {inst});
    manifest["files"].push_back({{"file", std::string(name) + ".json"}, {"seed", seed}});
  }
  vrptw::write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
  echo_config(out, config);
}

void cmd_train(const RunConfig& config, const fs::path& out, std::size_t workers) {
  train::TrainConfig tc = config.train();
  tc.workers = workers;
  const policy::ModelConfig model = config.model();
  echo_config(out, config);
  train::TrainHooks hooks;
  hooks.on_subproblem = [](const train::Subproblem& sp) {
    std::fprintf(stderr, "subproblem %zu (%.4f, %.4f): eval cost %.6g\n", sp.index, sp.weight[0], sp.weight[1],
                 sp.final_eval_cost);
  };
  const auto trained = train::train_all(tc, model, out, hooks);
  json manifest;
  manifest["individuals"] = json::array();
  for (const auto& sp : trained)
    manifest["individuals"].push_back({{"file", train::checkpoint_name(sp.index)},
                                       {"id", sp.index - 1},
                                       {"parent", nullptr},
                                       {"generation", 0},
                                       {"weight", {sp.weight[0], sp.weight[1]}}});
  vrptw::write_text_file(out / "population.json", manifest.dump(2) + "\n");
}

void cmd_evolve(const RunConfig& config, const fs::path& init, const fs::path& out, std::size_t workers) {
  auto pop = evo::load_population(init);
  check_model(config, pop.model, init);
  evo::EvoConfig ec = config.evo();
  ec.workers = workers;
  echo_config(out, config);
  evo::EvoHooks hooks;
  hooks.on_generation = [](std::size_t g, std::span<const evo::EvoLogRow> rows) {
    std::size_t kept = 0;
    for (const auto& r : rows) kept += r.survived && r.parent ? 1 : 0;
    std::fprintf(stderr, "generation %zu: %zu offspring survived\n", g, kept);
  };
  evo::evolve(std::move(pop.individuals), pop.model, ec, {}, out, hooks);
}

void cmd_solve(const RunConfig& config, const fs::path& policies, const fs::path& instances, const fs::path& out,
               std::size_t workers) {
  const auto pop = evo::load_population(policies);
  check_model(config, pop.model, policies);
  const auto inputs = load_instance_inputs(instances);
  std::vector<vrptw::Instance> list;
  for (const auto& n : inputs) list.push_back(n.instance);
  const auto params = population_params(pop);
  const auto res = evo::run_policies(params, pop.model, list, workers);
  echo_config(out, config);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto front = res.front(i);
    vrptw::write_text_file(out / (inputs[i].name + ".front.csv"), front_csv(front, "policy_index"));
    json sols = json::array();
    for (const auto& e : front.entries()) {
      json s = vrptw::solution_to_json(list[i], res.solutions[i][e.payload]);
      s["policy_index"] = e.payload;
      sols.push_back(std::move(s));
    }
    vrptw::write_text_file(out / (inputs[i].name + ".solutions.json"),
                           json{{"instance", inputs[i].name}, {"solutions", sols}}.dump(2) + "\n");
  }
}

BenchmarkReport cmd_benchmark(const RunConfig& config, const std::vector<std::pair<std::string, fs::path>>& populations,
                              const fs::path& instances, const fs::path& out, std::size_t workers) {
  const BenchmarkSettings bs = config.benchmark();
  const auto inputs = load_instance_inputs(instances);
  if (inputs.empty()) throw DataError("no instances found in " + instances.string());

  struct Entry {
    std::string label;
    std::optional<baselines::Algorithm> algorithm;
    std::vector<ad::ParamStore> params;
    policy::ModelConfig model;
  };
  std::vector<Entry> entries;
  for (const auto& a : bs.algorithms) {
    if (a != "policy") {
      entries.push_back({a, baselines::algorithm_from_string(a), {}, {}});
      continue;
    }
    if (populations.empty()) throw ConfigError("benchmark.algorithms includes 'policy' but no policy population was given");
    for (const auto& [label, dir] : populations) {
      const auto pop = evo::load_population(dir);
      check_model(config, pop.model, dir);
      entries.push_back({label, std::nullopt, population_params(pop), pop.model});
    }
  }
  for (std::size_t a = 0; a < entries.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (entries[a].label == entries[b].label) throw ConfigError("duplicate algorithm label '" + entries[a].label + "'");

  BenchmarkReport report;
  report.seed = config.seed();
  echo_config(out, config);
  // points[instance][entry]
  std::vector<std::vector<std::vector<pareto::Fitness>>> points(inputs.size());
  std::vector<std::vector<double>> seconds(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& inst = inputs[i].instance;
    for (const auto& e : entries) {
      const auto t0 = std::chrono::steady_clock::now();
      pareto::ParetoFront front;
      std::string csv;
      if (e.algorithm) {
        auto mc = config.baseline(*e.algorithm);
        mc.seed = derive_seed(config.seed(), i);
        front = baselines::solve(*e.algorithm, inst, mc).front;
        csv = front_csv(front, "solution_index");
      } else {
        const auto res = evo::run_policies(e.params, e.model, std::span(&inst, 1), workers);
        front = res.front(0);
        csv = front_csv(front, "policy_index");
      }
      seconds[i].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      points[i].push_back(front.points());
      vrptw::write_text_file(out / "fronts" / e.label / (inputs[i].name + ".csv"), csv);
      std::fprintf(stderr, "%s %s: %zu points in %.3f s\n", inputs[i].name.c_str(), e.label.c_str(), front.size(),
                   seconds[i].back());
    }
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    pareto::Fitness ref = bs.reference;
    if (ref.empty()) {
      ref = {0.0, 0.0};
      for (const auto& pts : points[i])
        for (const auto& p : pts)
          for (std::size_t d = 0; d < 2; ++d) ref[d] = std::max(ref[d], p[d]);
      for (double& r : ref) r *= bs.reference_factor;
    }
    for (std::size_t a = 0; a < entries.size(); ++a) {
      BenchmarkRow row;
      row.instance = inputs[i].name;
      row.algorithm = entries[a].label;
      row.hv = pareto::hypervolume_2d(points[i][a], ref).value;
      row.nds = pareto::distinct_non_dominated(points[i][a]);
      row.seconds = seconds[i][a];
      row.reference = ref;
      report.rows.push_back(std::move(row));
    }
  }
  for (const auto& e : entries) {
    std::vector<double> hv, nds, t;
    for (const auto& r : report.rows)
      if (r.algorithm == e.label) {
        hv.push_back(r.hv);
        nds.push_back(static_cast<double>(r.nds));
        t.push_back(r.seconds);
      }
    report.summary.push_back({e.label, mean_of(hv), std_of(hv), mean_of(nds), std_of(nds), mean_of(t), std_of(t)});
  }

  std::string csv = "instance,algorithm,hv,nds,time_s,ref_f1,ref_f2,seed\n";
  for (const auto& r : report.rows)
    csv += r.instance + "," + r.algorithm + "," + g10(r.hv) + "," + std::to_string(r.nds) + "," + g10(r.seconds) +
           "," + g10(r.reference[0]) + "," + g10(r.reference[1]) + "," + std::to_string(report.seed) + "\n";
  for (const auto& s : report.summary) {
    csv += "MEAN," + s.algorithm + "," + g10(s.hv_mean) + "," + g10(s.nds_mean) + "," + g10(s.time_mean) + ",,," +
           std::to_string(report.seed) + "\n";
    csv += "STD," + s.algorithm + "," + g10(s.hv_std) + "," + g10(s.nds_std) + "," + g10(s.time_std) + ",,," +
           std::to_string(report.seed) + "\n";
  }
  vrptw::write_text_file(out / "report.csv", csv);
  vrptw::write_text_file(out / "summary.txt", format_summary(report));
  return report;
}

std::string format_summary(const BenchmarkReport& report) {
  std::ostringstream o;
  char line[200];
  std::snprintf(line, sizeof line, "%-12s %22s %18s %18s\n", "algorithm", "HV", "|NDS|", "Time (s)");
  o << line;
  for (const auto& s : report.summary) {
    std::snprintf(line, sizeof line, "%-12s %11.4f (%8.4f) %8.2f (%6.2f) %8.3f (%6.3f)\n", s.algorithm.c_str(),
                  s.hv_mean, s.hv_std, s.nds_mean, s.nds_std, s.time_mean, s.time_std);
    o << line;
  }
  return o.str();
}

std::vector<pareto::Fitness> read_front_csv(const fs::path& path) {
  std::istringstream in(vrptw::read_text_file(path));
  std::string line;
  std::vector<pareto::Fitness> pts;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    try {
      std::size_t pa = 0, pb = 0;
      const double f1 = std::stod(a, &pa), f2 = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size() || !std::isfinite(f1) || !std::isfinite(f2)) throw std::invalid_argument(line);
      pts.push_back({f1, f2});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": expected f1,f2,...");
    }
  }
  return pts;
}

std::string cmd_metrics(const std::vector<fs::path>& fronts, const std::vector<double>& reference) {
  if (!reference.empty() && reference.size() != 2) throw ConfigError("reference needs two values");
  std::vector<std::vector<pareto::Fitness>> all;
  for (const auto& f : fronts) all.push_back(read_front_csv(f));
  pareto::Fitness ref = reference;
  if (ref.empty()) {
    ref = {0.0, 0.0};
    for (const auto& pts : all)
      for (const auto& p : pts)
        for (std::size_t d = 0; d < 2; ++d) ref[d] = std::max(ref[d], 1.1 * p[d]);
  }
  std::string out = "front,hv,nds,ref_f1,ref_f2\n";
  for (std::size_t i = 0; i < fronts.size(); ++i)
    out += fronts[i].string() + "," + g10(pareto::hypervolume_2d(all[i], ref).value) + "," +
           std::to_string(pareto::distinct_non_dominated(all[i])) + "," + g10(ref[0]) + "," + g10(ref[1]) + "\n";
  return out;
}

}  // namespace movrp::harness
