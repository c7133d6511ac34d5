#include "movrp/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "movrp/common/error.hpp"
#include "movrp/common/parallel.hpp"
#include "movrp/common/random.hpp"
#include "movrp/policy/checkpoint.hpp"
#include "movrp/policy/rollout.hpp"
#include "movrp/vrptw/generator.hpp"

namespace movrp::train {

using ad::ParamStore;
using policy::ModelConfig;

std::vector<WeightVector> make_weight_vectors(std::size_t m) {
  if (m == 0) throw ConfigError("make_weight_vectors: need at least one subproblem");
  std::vector<WeightVector> out;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(m);
    out.push_back({a, 1.0 - a});
  }
  return out;
}

std::vector<double> greedy_costs(const ParamStore& params, const ModelConfig& config, const WeightVector& weight,
                                 std::span<const vrptw::Instance> instances, std::size_t workers) {
  const auto rollouts = policy::solve_all(params, config, instances, policy::DecodeMode::Greedy, 0, workers);
  std::vector<double> out(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    out[i] = scalarize(weight, vrptw::evaluate_solution(instances[i], rollouts[i].solution));
  return out;
}

double mean_greedy_cost(const ParamStore& params, const ModelConfig& config, const WeightVector& weight,
                        std::span<const vrptw::Instance> instances, std::size_t workers) {
  if (instances.empty()) throw Error("mean_greedy_cost: empty instance set");
  double total = 0.0;
  for (double c : greedy_costs(params, config, weight, instances, workers)) total += c;
  return total / static_cast<double>(instances.size());
}

GradientResult reinforce_gradient(const ParamStore& policy, const ModelConfig& config, const WeightVector& weight,
                                  std::span<const vrptw::Instance> batch, std::span<const std::uint64_t> sample_seeds,
                                  std::span<const double> baseline_costs) {
  const std::size_t b = batch.size();
  if (b == 0) throw Error("reinforce_gradient: empty batch");
  if (sample_seeds.size() != b || baseline_costs.size() != b)
    throw Error("reinforce_gradient: seeds and baseline costs must match the batch size");

  GradientResult out;
  out.baselines.assign(baseline_costs.begin(), baseline_costs.end());
  ad::Tape tape(true);
  std::vector<const vrptw::Instance*> ptrs;
  for (const auto& inst : batch) ptrs.push_back(&inst);
  policy::EncodedBatch enc = policy::encode_nodes(tape, policy, config, ptrs, ad::NormMode::Train);

  std::vector<ad::Tensor> terms;
  for (std::size_t j = 0; j < b; ++j) {
    policy::EpisodeDecoder decoder(tape, policy, config, batch[j], enc.instance(j));
    std::mt19937_64 rng(sample_seeds[j]);
    const policy::Rollout r = policy::rollout(decoder, batch[j], policy::DecodeMode::Sample, &rng);
    const double cost = scalarize(weight, vrptw::evaluate_solution(batch[j], r.solution));
    const double advantage = cost - baseline_costs[j];
    if (!std::isfinite(advantage))
      throw NumericError("reinforce_gradient: non-finite advantage for batch item " + std::to_string(j));
    out.costs.push_back(cost);
    if (r.log_prob_tensor.defined()) terms.push_back(ad::scale(r.log_prob_tensor, advantage / static_cast<double>(b)));
  }
  for (std::size_t j = 0; j < b; ++j) {
    out.mean_cost += out.costs[j] / static_cast<double>(b);
    out.mean_baseline += out.baselines[j] / static_cast<double>(b);
  }
  out.norm_updates = std::move(enc.norm_updates);
  if (terms.empty()) {
    out.grad = policy.zeros_like();
  } else {
    const ad::Tensor loss = terms.size() == 1 ? terms[0] : ad::sum(ad::concat_cols(terms));
    out.grad = tape.backward(loss, policy);
  }
  return out;
}

GradientResult reinforce_gradient(const ParamStore& policy, const ParamStore& baseline, const ModelConfig& config,
                                  const WeightVector& weight, std::span<const vrptw::Instance> batch,
                                  std::span<const std::uint64_t> sample_seeds, std::size_t workers) {
  const auto b = greedy_costs(baseline, config, weight, batch, workers);
  return reinforce_gradient(policy, config, weight, batch, sample_seeds, b);
}

BaselineDecision update_rollout_baseline(const ParamStore& policy, ParamStore& baseline, const ModelConfig& config,
                                         const WeightVector& weight, std::span<const vrptw::Instance> eval_set,
                                         double threshold, std::size_t workers) {
  BaselineDecision d;
  d.policy_cost = mean_greedy_cost(policy, config, weight, eval_set, workers);
  d.baseline_cost = mean_greedy_cost(baseline, config, weight, eval_set, workers);
  if (baseline_should_replace(d.policy_cost, d.baseline_cost, threshold)) {
    baseline = policy;
    d.replaced = true;
  }
  return d;
}

void TrainConfig::validate() const {
  if (subproblems == 0) throw ConfigError("train: subproblems must be >= 1");
  if (customers == 0) throw ConfigError("train: customers must be >= 1");
  if (batch_size == 0 || batches_per_epoch == 0 || transfer_batches_per_epoch == 0) throw ConfigError("train: batch sizes must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (!(baseline_threshold >= 0.0 && baseline_threshold < 1.0))
    throw ConfigError("train: baseline threshold must lie in [0, 1)");
  if (baseline_eval_size == 0) throw ConfigError("train: baseline_eval_size must be >= 1");
  if (workers == 0) throw ConfigError("train: workers must be >= 1");
}

TrainConfig desk_train_config() {
  TrainConfig c;
  c.customers = 20;
  c.batch_size = 32;
  c.batches_per_epoch = 300;
  c.transfer_batches_per_epoch = 150;
  c.baseline_eval_size = 32;
  return c;
}

std::vector<vrptw::Instance> training_batch(const TrainConfig& config, std::size_t subproblem, std::size_t step) {
  const std::uint64_t base = derive_seed(derive_seed(config.seed, 0x7261696eULL + subproblem), step);
  std::vector<vrptw::Instance> out;
  out.reserve(config.batch_size);
  for (std::size_t j = 0; j < config.batch_size; ++j)
    out.push_back(vrptw::generate_instance(config.customers, derive_seed(base, j), config.size_class));
  return out;
}

std::vector<vrptw::Instance> baseline_eval_set(const TrainConfig& config) {
  const std::uint64_t base = derive_seed(config.seed, 0x6576616cULL);
  std::vector<vrptw::Instance> out;
  for (std::size_t j = 0; j < config.baseline_eval_size; ++j)
    out.push_back(vrptw::generate_instance(config.customers, derive_seed(base, j), config.size_class));
  return out;
}

std::string checkpoint_name(std::size_t subproblem) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "subproblem_%03zu.json", subproblem);
  return buf;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json subproblem_meta(const Subproblem& sp, std::size_t epochs_done) {
  return {{"subproblem", sp.index},
          {"weight", {sp.weight[0], sp.weight[1]}},
          {"epochs", epochs_done},
          {"final_train_cost", sp.final_train_cost},
          {"final_eval_cost", sp.final_eval_cost}};
}

}  // namespace

Subproblem train_subproblem(const TrainConfig& config, const ModelConfig& model, std::size_t index,
                            const WeightVector& weight, const ParamStore& init, std::size_t epochs,
                            std::size_t batches, const TrainHooks& hooks, const EpochCallback& on_epoch) {
  config.validate();
  policy::check_params(init, model);
  if (index == 0) throw ConfigError("train: subproblem index is 1-based");
  if (batches == 0) throw ConfigError("train: batches per epoch must be >= 1");
  const auto eval_set = baseline_eval_set(config);

  Subproblem sp;
  sp.index = index;
  sp.weight = weight;
  sp.initial_params = init;
  ParamStore params = init;
  ParamStore baseline = params;
  ad::AdamState adam(params, ad::AdamConfig{config.learning_rate});
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    double epoch_cost = 0.0;
    for (std::size_t bi = 1; bi <= batches; ++bi, ++step) {
      const auto batch = training_batch(config, index, step);
      std::vector<std::uint64_t> seeds(batch.size());
      const std::uint64_t sample_base = derive_seed(derive_seed(config.seed, 0x73616d70ULL + index), step);
      for (std::size_t j = 0; j < seeds.size(); ++j) seeds[j] = derive_seed(sample_base, j);
      GradientResult g = reinforce_gradient(params, baseline, model, weight, batch, seeds, config.workers);
      ad::adam_step(params, g.grad, adam);
      policy::apply_norm_updates(params, g.norm_updates);
      epoch_cost += g.mean_cost;
      if (hooks.on_batch) hooks.on_batch(TrainLogRow{index, epoch, bi, g.mean_cost, g.mean_baseline});
    }
    const BaselineDecision d = update_rollout_baseline(params, baseline, model, weight, eval_set,
                                                       config.baseline_threshold, config.workers);
    sp.final_train_cost = epoch_cost / static_cast<double>(batches);
    sp.final_eval_cost = d.policy_cost;
    sp.params = params;
    if (on_epoch) on_epoch(sp, epoch);
  }
  if (epochs == 0) {
    sp.params = params;
    sp.final_eval_cost = mean_greedy_cost(params, model, weight, eval_set, config.workers);
    if (on_epoch) on_epoch(sp, 0);
  }
  if (hooks.on_subproblem) hooks.on_subproblem(sp);
  return sp;
}

std::vector<Subproblem> train_all(const TrainConfig& config, const ModelConfig& model,
                                  const std::filesystem::path& out_dir, const TrainHooks& hooks,
                                  const ParamStore& init) {
  config.validate();
  model.validate();
  const auto weights = make_weight_vectors(config.subproblems);

  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    log.open(out_dir / "train_log.csv", std::ios::binary | std::ios::trunc);
    if (!log) throw DataError("cannot write " + (out_dir / "train_log.csv").string());
    log << "subproblem,epoch,batch,mean_cost,baseline_cost\n";
  }
  TrainHooks logged = hooks;
  logged.on_batch = [&](const TrainLogRow& row) {
    if (log.is_open())
      log << row.subproblem << ',' << row.epoch << ',' << row.batch << ',' << fmt(row.mean_cost) << ','
          << fmt(row.baseline_cost) << '\n';
    if (hooks.on_batch) hooks.on_batch(row);
  };
  const EpochCallback save = [&](const Subproblem& sp, std::size_t epoch) {
    if (out_dir.empty()) return;
    log.flush();
    policy::save_checkpoint(out_dir / checkpoint_name(sp.index), model, sp.params, subproblem_meta(sp, epoch));
  };

  std::vector<Subproblem> out;
  ParamStore params = init.empty() ? policy::init_params(model, derive_seed(config.seed, 0x696e6974ULL)) : init;
  for (std::size_t i = 1; i <= config.subproblems; ++i) {
    const bool first = i == 1;
    out.push_back(train_subproblem(config, model, i, weights[i - 1], params,
                                   first ? config.first_epochs : config.transfer_epochs,
                                   first ? config.batches_per_epoch : config.transfer_batches_per_epoch, logged,
                                   save));
    params = out.back().params;
  }
  return out;
}

}  // namespace movrp::train
