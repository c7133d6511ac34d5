#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "movrp/ad/param_store.hpp"
#include "movrp/ad/tensor.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/policy/model.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::policy {

enum class DecodeMode { Greedy, Sample };

struct Rollout {
  vrptw::Solution solution;
  std::vector<std::size_t> actions;
  // Sum of the log-probabilities of the chosen actions.
  double log_prob = 0.0;
  // Same sum as a tape node; undefined when every move was forced.
  ad::Tensor log_prob_tensor;
  // Steps where more than one node was feasible and the decoder ran. Steps
  // with a single feasible node are taken directly with probability 1.
  std::size_t decisions = 0;
};

// Greedy takes the most probable node (lowest index on ties); sample draws
// from the policy with `rng`, which Sample mode requires.
Rollout rollout(EpisodeDecoder& decoder, const vrptw::Instance& instance, DecodeMode mode,
                std::mt19937_64* rng = nullptr);

// Teacher forcing: follows `actions` and accumulates their log-probabilities.
// Throws Error if an action is infeasible or the sequence does not finish.
Rollout replay(EpisodeDecoder& decoder, const vrptw::Instance& instance, std::span<const std::size_t> actions);

// Categorical draw over nodes passing `mask`, from a row of log-probabilities.
std::size_t sample_action(std::span<const double> log_probs, const vrptw::Mask& mask, std::mt19937_64& rng);
std::size_t greedy_action(std::span<const double> log_probs, const vrptw::Mask& mask);

// Self-contained episode on a private non-recording tape with eval-mode
// normalization. Sample mode seeds its generator with `seed`.
Rollout solve(const ad::ParamStore& params, const ModelConfig& config, const vrptw::Instance& instance,
              DecodeMode mode, std::uint64_t seed = 0);

// solve() over many instances; instance i samples with derive_seed(seed, i).
std::vector<Rollout> solve_all(const ad::ParamStore& params, const ModelConfig& config,
                               std::span<const vrptw::Instance> instances, DecodeMode mode, std::uint64_t seed,
                               std::size_t workers);

}  // namespace movrp::policy
