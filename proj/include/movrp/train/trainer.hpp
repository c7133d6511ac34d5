#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "movrp/ad/adam.hpp"
#include "movrp/ad/param_store.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/policy/model.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::train {

using WeightVector = std::array<double, 2>;

// lambda_i = ((i - 1) / M, 1 - (i - 1) / M) for i = 1..M.
std::vector<WeightVector> make_weight_vectors(std::size_t m);

inline double scalarize(const WeightVector& w, const vrptw::ObjectiveVector& f) { return w[0] * f.f1 + w[1] * f.f2; }

struct GradientResult {
  ad::ParamStore grad;
  // Running-statistic refresh from the train-mode encoder pass.
  std::vector<policy::NormUpdate> norm_updates;
  double mean_cost = 0.0;
  double mean_baseline = 0.0;
  std::vector<double> costs;
  std::vector<double> baselines;
};

// (1/B) sum_j (cost_j - b_j) grad log p(s_j), with s_j sampled (generator
// seeded by sample_seeds[j]) from `policy` under train-mode normalization
// and b_j the scalarized cost of `baseline`'s greedy eval-mode rollout.
// Throws NumericError on a non-finite advantage.
GradientResult reinforce_gradient(const ad::ParamStore& policy, const ad::ParamStore& baseline,
                                  const policy::ModelConfig& config, const WeightVector& weight,
                                  std::span<const vrptw::Instance> batch, std::span<const std::uint64_t> sample_seeds,
                                  std::size_t workers = 1);

// Same, with baseline costs supplied by the caller.
GradientResult reinforce_gradient(const ad::ParamStore& policy, const policy::ModelConfig& config,
                                  const WeightVector& weight, std::span<const vrptw::Instance> batch,
                                  std::span<const std::uint64_t> sample_seeds, std::span<const double> baseline_costs);

// Scalarized costs of greedy eval-mode rollouts.
std::vector<double> greedy_costs(const ad::ParamStore& params, const policy::ModelConfig& config,
                                 const WeightVector& weight, std::span<const vrptw::Instance> instances,
                                 std::size_t workers = 1);
double mean_greedy_cost(const ad::ParamStore& params, const policy::ModelConfig& config, const WeightVector& weight,
                        std::span<const vrptw::Instance> instances, std::size_t workers = 1);

struct BaselineDecision {
  bool replaced = false;
  double policy_cost = 0.0;
  double baseline_cost = 0.0;
};

// policy_cost < baseline_cost * (1 - threshold). Relative, so scaling both
// costs by a positive constant leaves the decision unchanged.
inline bool baseline_should_replace(double policy_cost, double baseline_cost, double threshold) {
  return policy_cost < baseline_cost * (1.0 - threshold);
}

// Replaces `baseline` with `policy` when baseline_should_replace holds for
// the mean greedy costs on the evaluation set.
BaselineDecision update_rollout_baseline(const ad::ParamStore& policy, ad::ParamStore& baseline,
                                         const policy::ModelConfig& config, const WeightVector& weight,
                                         std::span<const vrptw::Instance> eval_set, double threshold = 0.0,
                                         std::size_t workers = 1);

// Defaults are the full-scale settings: 10 epochs of 512,000 instances for the
// first subproblem, 1 epoch of 256,000 for each transfer, batch 128.
struct TrainConfig {
  std::size_t subproblems = 100;
  std::size_t customers = 50;
  vrptw::SizeClass size_class = vrptw::SizeClass::N50;
  std::size_t batch_size = 128;
  std::size_t batches_per_epoch = 4000;
  std::size_t transfer_batches_per_epoch = 2000;
  std::size_t first_epochs = 10;
  std::size_t transfer_epochs = 1;
  double learning_rate = 1e-4;
  double baseline_threshold = 0.0;
  std::size_t baseline_eval_size = 128;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

// Scaled down with the same ratios: n = 20, batch 32, 300 batches per first
// epoch and 150 per transfer epoch, 32 baseline evaluation instances.
TrainConfig desk_train_config();

struct TrainLogRow {
  std::size_t subproblem = 0;  // 1-based
  std::size_t epoch = 0;       // 1-based
  std::size_t batch = 0;       // 1-based within the epoch
  double mean_cost = 0.0;
  double baseline_cost = 0.0;
};

struct Subproblem {
  std::size_t index = 0;  // 1-based
  WeightVector weight{};
  ad::ParamStore params;
  ad::ParamStore initial_params;
  // Mean sampled cost over the final epoch and greedy cost on the baseline
  // evaluation set after training.
  double final_train_cost = 0.0;
  double final_eval_cost = 0.0;
};

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_batch;
  std::function<void(const Subproblem&)> on_subproblem;
};

// Random instances for training step `step` of subproblem `subproblem`.
std::vector<vrptw::Instance> training_batch(const TrainConfig& config, std::size_t subproblem, std::size_t step);
std::vector<vrptw::Instance> baseline_eval_set(const TrainConfig& config);

using EpochCallback = std::function<void(const Subproblem&, std::size_t epoch)>;

// One subproblem: `epochs` epochs of `batches` REINFORCE steps from `init`,
// with a fresh Adam state and rollout baseline. Instances and sampling seeds
// depend on (config.seed, index, step). `on_epoch` fires after each epoch's
// baseline check (once with epoch 0 when epochs is 0).
Subproblem train_subproblem(const TrainConfig& config, const policy::ModelConfig& model, std::size_t index,
                            const WeightVector& weight, const ad::ParamStore& init, std::size_t epochs,
                            std::size_t batches, const TrainHooks& hooks = {}, const EpochCallback& on_epoch = {});

// Trains subproblem 1 from `init` (or a fresh seeded init when empty) for
// first_epochs, then each later subproblem from its finished predecessor for
// transfer_epochs. When `out_dir` is non-empty, writes train_log.csv and one
// checkpoint per subproblem (refreshed at every epoch end).
std::vector<Subproblem> train_all(const TrainConfig& config, const policy::ModelConfig& model,
                                  const std::filesystem::path& out_dir = {}, const TrainHooks& hooks = {},
                                  const ad::ParamStore& init = {});

std::string checkpoint_name(std::size_t subproblem);

}  // namespace movrp::train
