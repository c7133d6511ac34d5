#include "movrp/evo/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "movrp/ad/tensor.hpp"
#include "movrp/common/error.hpp"
#include "movrp/common/parallel.hpp"
#include "movrp/common/random.hpp"
#include "movrp/policy/checkpoint.hpp"
#include "movrp/policy/model.hpp"
#include "movrp/policy/rollout.hpp"
#include "movrp/vrptw/generator.hpp"
#include "movrp/vrptw/io.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::evo {

void EvoConfig::validate() const {
  if (!(mutation >= 0.0) || !std::isfinite(mutation)) throw ConfigError("evo: mutation must be >= 0");
  if (batch_size == 0) throw ConfigError("evo: batch_size must be >= 1");
  if (!(sensitivity_floor > 0.0)) throw ConfigError("evo: sensitivity_floor must be > 0");
  if (customers == 0) throw ConfigError("evo: customers must be >= 1");
  if (workers == 0) throw ConfigError("evo: workers must be >= 1");
}

EvoConfig desk_evo_config() {
  EvoConfig c;
  c.batch_size = 16;
  c.generations = 10;
  return c;
}

std::vector<Individual> initial_population(std::span<const train::Subproblem> trained) {
  std::vector<Individual> pop;
  pop.reserve(trained.size());
  for (std::size_t i = 0; i < trained.size(); ++i) {
    Individual ind;
    ind.params = trained[i].params;
    ind.id = i;
    ind.weight = trained[i].weight;
    pop.push_back(std::move(ind));
  }
  return pop;
}

ad::ParamStore sensitivity(const ad::ParamStore& params, const policy::ModelConfig& config,
                           std::span<const vrptw::Instance> batch, std::mt19937_64& rng) {
  if (batch.empty()) throw Error("sensitivity: empty batch");
  const std::size_t nodes = batch[0].node_count();
  for (const auto& inst : batch)
    if (inst.node_count() != nodes) throw ConfigError("sensitivity: instances must share one node count");

  std::vector<std::vector<std::size_t>> actions;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& inst : batch) {
    actions.push_back(policy::solve(params, config, inst, policy::DecodeMode::Greedy).actions);
    shortest = std::min(shortest, actions.back().size());
  }
  const std::size_t t = std::uniform_int_distribution<std::size_t>(1, shortest)(rng);

  ad::Tape tape(true);
  std::vector<vrptw::RoutingState> states;
  states.reserve(batch.size());
  ad::Tensor total;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    states.emplace_back(batch[j]);
    for (std::size_t s = 0; s + 1 < t; ++s) states[j].apply(actions[j][s]);
    ad::Tensor h = policy::encode_nodes(tape, params, config, batch[j], ad::NormMode::Eval);
    policy::EpisodeDecoder dec(tape, params, config, batch[j], h);
    ad::Tensor p = ad::exp(dec.log_probs(states[j]));
    total = total.defined() ? ad::add(total, p) : p;
  }

  ad::ParamStore eps = params;
  for (auto& p : eps) std::fill(p.values.begin(), p.values.end(), 0.0);
  for (std::size_t k = 0; k < nodes; ++k) {
    const ad::ParamStore g = tape.backward(ad::slice_cols(total, k, k + 1), params, ad::Retain::Yes);
    for (std::size_t s = 0; s < eps.size(); ++s) {
      if (!eps[s].trainable) continue;
      for (std::size_t c = 0; c < eps[s].values.size(); ++c) eps[s].values[c] += g[s].values[c] * g[s].values[c];
    }
  }
  for (auto& p : eps)
    for (double& v : p.values) v = std::sqrt(v);
  return eps;
}

ad::ParamStore proximal_mutate(const ad::ParamStore& params, double mu, const ad::ParamStore& eps, double floor,
                               std::mt19937_64& rng) {
  if (!(mu >= 0.0)) throw ConfigError("proximal_mutate: mu must be >= 0");
  if (eps.size() != params.size()) throw ShapeError("proximal_mutate: sensitivity layout differs from params");
  ad::ParamStore out = params;
  if (mu == 0.0) return out;
  const double sd = std::sqrt(mu);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    if (!out[s].trainable) continue;
    if (eps[s].values.size() != out[s].values.size())
      throw ShapeError("proximal_mutate: sensitivity shape differs for " + out[s].name);
    for (std::size_t c = 0; c < out[s].values.size(); ++c)
      out[s].values[c] += sd * normal(rng) / std::max(eps[s].values[c], floor);
  }
  return out;
}

vrptw::ObjectiveVector evaluate_individual(const ad::ParamStore& params, const policy::ModelConfig& config,
                                           std::span<const vrptw::Instance> batch, std::size_t workers) {
  if (batch.empty()) throw Error("evaluate_individual: empty batch");
  const auto rollouts = policy::solve_all(params, config, batch, policy::DecodeMode::Greedy, 0, workers);
  vrptw::ObjectiveVector mean{0.0, 0.0};
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto f = vrptw::evaluate_solution(batch[j], rollouts[j].solution);
    mean.f1 += f.f1;
    mean.f2 += f.f2;
  }
  mean.f1 /= static_cast<double>(batch.size());
  mean.f2 /= static_cast<double>(batch.size());
  return mean;
}

std::vector<std::size_t> select_survivors(const std::vector<pareto::Fitness>& fitness,
                                          std::span<const std::size_t> tags, std::size_t keep) {
  return pareto::nsga2_select(fitness, tags, keep);
}

std::vector<Individual> select_survivors(std::vector<Individual> individuals, std::size_t keep) {
  std::vector<pareto::Fitness> fitness;
  std::vector<std::size_t> tags;
  for (const auto& ind : individuals) {
    if (!ind.evaluated) throw Error("select_survivors: individual " + std::to_string(ind.id) + " has no fitness");
    fitness.push_back({ind.fitness.f1, ind.fitness.f2});
    tags.push_back(ind.id);
  }
  std::vector<Individual> out;
  for (std::size_t i : select_survivors(fitness, tags, keep)) out.push_back(std::move(individuals[i]));
  return out;
}

InstanceSampler default_sampler(const EvoConfig& config) {
  return [config](std::size_t generation) {
    std::vector<vrptw::Instance> batch;
    batch.reserve(config.batch_size);
    const std::uint64_t base = derive_seed(derive_seed(config.seed, 0x65766f6cULL), generation);
    for (std::size_t j = 0; j < config.batch_size; ++j)
      batch.push_back(vrptw::generate_instance(config.customers, derive_seed(base, j), config.size_class));
    return batch;
  };
}

namespace {

void evaluate_all(std::vector<Individual>& pop, const policy::ModelConfig& model,
                  std::span<const vrptw::Instance> batch, std::size_t workers) {
  parallel_for(pop.size(), workers, [&](std::size_t i) {
    pop[i].fitness = evaluate_individual(pop[i].params, model, batch);
    pop[i].evaluated = true;
  });
}

std::string format_row(const EvoLogRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.10g,%.10g,%d\n", r.generation, r.id,
                r.parent ? std::to_string(*r.parent).c_str() : "", r.fitness.f1, r.fitness.f2, r.survived ? 1 : 0);
  return buf;
}

}  // namespace

std::vector<Individual> evolve(std::vector<Individual> population, const policy::ModelConfig& model,
                               const EvoConfig& config, const InstanceSampler& sampler,
                               const std::filesystem::path& out_dir, const EvoHooks& hooks) {
  config.validate();
  if (population.empty()) throw ConfigError("evolve: empty population");
  for (const auto& ind : population) policy::check_params(ind.params, model);
  const InstanceSampler draw = sampler ? sampler : default_sampler(config);
  const std::size_t m = population.size();

  std::string log = "generation,individual,parent,f1,f2,survived\n";
  const auto emit = [&](std::size_t g, const std::vector<EvoLogRow>& rows) {
    for (const auto& r : rows) log += format_row(r);
    if (hooks.on_generation) hooks.on_generation(g, rows);
  };

  {
    const auto batch = draw(0);
    evaluate_all(population, model, batch, config.workers);
    std::vector<EvoLogRow> rows;
    for (const auto& ind : population) rows.push_back({0, ind.id, ind.parent, ind.fitness, true});
    emit(0, rows);
  }

  std::size_t next_id = 0;
  for (const auto& ind : population) next_id = std::max(next_id, ind.id + 1);

  for (std::size_t g = 1; g <= config.generations; ++g) {
    const auto batch = draw(g);
    std::vector<Individual> offspring(m);
    parallel_for(m, config.workers, [&](std::size_t i) {
      std::mt19937_64 rng(derive_seed(derive_seed(config.seed, g), i));
      const auto eps = sensitivity(population[i].params, model, batch, rng);
      Individual child;
      child.params = proximal_mutate(population[i].params, config.mutation, eps, config.sensitivity_floor, rng);
      child.id = next_id + i;
      child.parent = population[i].id;
      child.generation = g;
      child.weight = population[i].weight;
      offspring[i] = std::move(child);
    });
    next_id += m;

    std::vector<Individual> all = std::move(population);
    all.insert(all.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
    evaluate_all(all, model, batch, config.workers);
    for (const auto& ind : all)
      for (double v : {ind.fitness.f1, ind.fitness.f2})
        if (!std::isfinite(v)) throw NumericError("evolve: non-finite fitness for individual " + std::to_string(ind.id));

    std::vector<EvoLogRow> rows;
    for (const auto& ind : all) rows.push_back({g, ind.id, ind.parent, ind.fitness, false});
    population = select_survivors(std::move(all), m);
    for (auto& r : rows)
      r.survived = std::any_of(population.begin(), population.end(), [&](const Individual& s) { return s.id == r.id; });
    emit(g, rows);
  }

  if (!out_dir.empty()) {
    vrptw::write_text_file(out_dir / "evo_log.csv", log);
    save_population(out_dir, model, population);
  }
  return population;
}

namespace {

nlohmann::json lineage_json(const Individual& ind) {
  nlohmann::json j;
  j["id"] = ind.id;
  j["parent"] = ind.parent ? nlohmann::json(*ind.parent) : nlohmann::json(nullptr);
  j["generation"] = ind.generation;
  j["weight"] = {ind.weight[0], ind.weight[1]};
  if (ind.evaluated) j["fitness"] = {ind.fitness.f1, ind.fitness.f2};
  return j;
}

}  // namespace

void save_population(const std::filesystem::path& dir, const policy::ModelConfig& model,
                     std::span<const Individual> population) {
  nlohmann::json manifest;
  manifest["individuals"] = nlohmann::json::array();
  for (std::size_t i = 0; i < population.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "individual_%03zu.json", i);
    auto entry = lineage_json(population[i]);
    policy::save_checkpoint(dir / name, model, population[i].params, entry);
    entry["file"] = name;
    manifest["individuals"].push_back(entry);
  }
  vrptw::write_text_file(dir / "population.json", manifest.dump(2) + "\n");
}

LoadedPopulation load_population(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(vrptw::read_text_file(dir / "population.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("population manifest " + (dir / "population.json").string() + ": " + e.what());
  }
  LoadedPopulation out;
  bool first = true;
  try {
    for (const auto& e : manifest.at("individuals")) {
      auto ck = policy::load_checkpoint(dir / e.at("file").get<std::string>());
      if (first) {
        out.model = ck.config;
        first = false;
      } else if (policy::to_json(ck.config) != policy::to_json(out.model)) {
        throw DataError("population: members have different model configs");
      }
      Individual ind;
      ind.params = std::move(ck.params);
      ind.id = e.at("id").get<std::size_t>();
      if (!e.at("parent").is_null()) ind.parent = e.at("parent").get<std::size_t>();
      ind.generation = e.at("generation").get<std::size_t>();
      ind.weight = {e.at("weight")[0].get<double>(), e.at("weight")[1].get<double>()};
      if (e.contains("fitness")) {
        ind.fitness = {e["fitness"][0].get<double>(), e["fitness"][1].get<double>()};
        ind.evaluated = true;
      }
      out.individuals.push_back(std::move(ind));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("population manifest " + (dir / "population.json").string() + ": " + ex.what());
  }
  if (out.individuals.empty()) throw DataError("population manifest lists no individuals");
  return out;
}

}  // namespace movrp::evo
