#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "movrp/ad/param_store.hpp"
#include "movrp/pareto/pareto.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/train/trainer.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::evo {

struct EvoConfig {
  double mutation = 0.01;  // variance of the Gaussian draw
  std::size_t batch_size = 64;
  std::size_t generations = 30;
  double sensitivity_floor = 1e-8;
  std::size_t customers = 20;
  vrptw::SizeClass size_class = vrptw::SizeClass::N50;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

// Batch 16, 10 generations.
EvoConfig desk_evo_config();

struct Individual {
  ad::ParamStore params;
  vrptw::ObjectiveVector fitness;
  bool evaluated = false;
  // Lineage: unique id in creation order, parent id (none for the initial
  // population) and the generation that created it.
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::size_t generation = 0;
  // Weight vector the ancestor was trained on. Reporting only.
  train::WeightVector weight{0.0, 1.0};
};

std::vector<Individual> initial_population(std::span<const train::Subproblem> trained);

// Per-coordinate sensitivity sqrt(sum_k (sum_j dp(v_t = k | s_j) / dtheta)^2)
// at one decoding step t drawn uniformly from [1, T] with `rng`, where T is
// the shortest greedy episode in the batch and s_j is the state after t - 1
// greedy steps on instance j. Same layout as `params`; non-trainable entries
// are 0. All instances must have the same node count.
ad::ParamStore sensitivity(const ad::ParamStore& params, const policy::ModelConfig& config,
                           std::span<const vrptw::Instance> batch, std::mt19937_64& rng);

// theta + x / max(eps, floor) with x ~ N(0, mu) per trainable coordinate.
// Non-trainable entries are copied.
ad::ParamStore proximal_mutate(const ad::ParamStore& params, double mu, const ad::ParamStore& eps, double floor,
                               std::mt19937_64& rng);

// Coordinate-wise mean of the greedy objectives over `batch`.
vrptw::ObjectiveVector evaluate_individual(const ad::ParamStore& params, const policy::ModelConfig& config,
                                           std::span<const vrptw::Instance> batch, std::size_t workers = 1);

// NSGA-II survivor selection: whole non-domination fronts, the boundary front
// cut by descending crowding distance, ties by ascending tag. Returns the kept
// indices in ascending order.
std::vector<std::size_t> select_survivors(const std::vector<pareto::Fitness>& fitness,
                                          std::span<const std::size_t> tags, std::size_t keep);
// Same on individuals, tagged by id. Requires every fitness to be set.
std::vector<Individual> select_survivors(std::vector<Individual> individuals, std::size_t keep);

struct EvoLogRow {
  std::size_t generation = 0;
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  vrptw::ObjectiveVector fitness;
  bool survived = false;
};

// Instances for generation g.
using InstanceSampler = std::function<std::vector<vrptw::Instance>(std::size_t generation)>;
// Fresh instances of config.customers customers, seeded by (seed, g, j).
InstanceSampler default_sampler(const EvoConfig& config);

struct EvoHooks {
  std::function<void(std::size_t generation, std::span<const EvoLogRow> rows)> on_generation;
};

// Generation 0 stamps the fitness of the initial population on sampler(0).
// Each later generation draws sampler(g); every parent produces one offspring
// by sensitivity + proximal mutation on that batch; parents and offspring are
// evaluated on it and select_survivors keeps the population size. When
// `out_dir` is non-empty, writes evo_log.csv and the final population there.
std::vector<Individual> evolve(std::vector<Individual> population, const policy::ModelConfig& model,
                               const EvoConfig& config, const InstanceSampler& sampler = {},
                               const std::filesystem::path& out_dir = {}, const EvoHooks& hooks = {});

// individual_NNN.json checkpoints plus population.json listing file, id,
// parent, generation, weight and fitness of each member.
void save_population(const std::filesystem::path& dir, const policy::ModelConfig& model,
                     std::span<const Individual> population);
struct LoadedPopulation {
  policy::ModelConfig model;
  std::vector<Individual> individuals;
};
LoadedPopulation load_population(const std::filesystem::path& dir);

}  // namespace movrp::evo
