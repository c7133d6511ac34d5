#include "movrp/policy/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "movrp/common/error.hpp"
#include "movrp/common/parallel.hpp"
#include "movrp/common/random.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::policy {

namespace {

std::size_t only_feasible(const vrptw::Mask& mask) {
  std::size_t count = 0, which = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) {
      ++count;
      which = i;
    }
  if (count == 0) throw Error("rollout: no feasible node");
  return count == 1 ? which : mask.size();
}

Rollout run(EpisodeDecoder& decoder, const vrptw::Instance& instance, DecodeMode mode, std::mt19937_64* rng,
            std::span<const std::size_t> forced, bool forcing) {
  if (!forcing && mode == DecodeMode::Sample && !rng) throw Error("rollout: sampling needs a random generator");
  vrptw::RoutingState state(instance);
  Rollout out;
  std::vector<ad::Tensor> chosen;
  while (!state.done()) {
    if (state.steps() >= state.step_budget())
      throw Error("rollout: step budget of " + std::to_string(state.step_budget()) + " exceeded");
    if (forcing && state.steps() >= forced.size()) throw Error("replay: action sequence ends before the episode");
    const vrptw::Mask mask = state.mask();
    std::size_t action = only_feasible(mask);
    if (action == mask.size()) {
      ad::Tensor lp = decoder.log_probs(state, mask);
      const auto values = lp.values();
      if (forcing) {
        action = forced[state.steps()];
      } else {
        action = mode == DecodeMode::Greedy ? greedy_action(values, mask) : sample_action(values, mask, *rng);
      }
      if (action >= mask.size() || !mask[action])
        throw Error("replay: action " + std::to_string(action) + " is infeasible at step " +
                    std::to_string(state.steps()));
      out.log_prob += values[action];
      chosen.push_back(ad::slice_cols(lp, action, action + 1));
      ++out.decisions;
    } else if (forcing && forced[state.steps()] != action) {
      throw Error("replay: action " + std::to_string(forced[state.steps()]) + " is infeasible at step " +
                  std::to_string(state.steps()));
    }
    state.apply(action);
    out.actions.push_back(action);
  }
  if (forcing && out.actions.size() != forced.size()) throw Error("replay: action sequence continues past the end");
  if (!chosen.empty()) out.log_prob_tensor = chosen.size() == 1 ? chosen[0] : ad::sum(ad::concat_cols(chosen));
  out.solution = state.solution();
  return out;
}

}  // namespace

std::size_t greedy_action(std::span<const double> log_probs, const vrptw::Mask& mask) {
  std::size_t best = mask.size();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && (best == mask.size() || log_probs[i] > log_probs[best])) best = i;
  if (best == mask.size()) throw Error("greedy_action: no feasible node");
  return best;
}

std::size_t sample_action(std::span<const double> log_probs, const vrptw::Mask& mask, std::mt19937_64& rng) {
  double total = 0.0;
  std::size_t last = mask.size();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) {
      total += std::exp(log_probs[i]);
      last = i;
    }
  if (last == mask.size()) throw Error("sample_action: no feasible node");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    acc += std::exp(log_probs[i]);
    if (u < acc) return i;
  }
  return last;
}

Rollout rollout(EpisodeDecoder& decoder, const vrptw::Instance& instance, DecodeMode mode, std::mt19937_64* rng) {
  return run(decoder, instance, mode, rng, {}, false);
}

Rollout replay(EpisodeDecoder& decoder, const vrptw::Instance& instance, std::span<const std::size_t> actions) {
  return run(decoder, instance, DecodeMode::Greedy, nullptr, actions, true);
}

Rollout solve(const ad::ParamStore& params, const ModelConfig& config, const vrptw::Instance& instance,
              DecodeMode mode, std::uint64_t seed) {
  ad::Tape tape(false);
  EpisodeDecoder decoder(tape, params, config, instance, encode_nodes(tape, params, config, instance, ad::NormMode::Eval));
  std::mt19937_64 rng(seed);
  Rollout r = rollout(decoder, instance, mode, &rng);
  r.log_prob_tensor = {};
  return r;
}

std::vector<Rollout> solve_all(const ad::ParamStore& params, const ModelConfig& config,
                               std::span<const vrptw::Instance> instances, DecodeMode mode, std::uint64_t seed,
                               std::size_t workers) {
  std::vector<Rollout> out(instances.size());
  parallel_for(instances.size(), workers,
               [&](std::size_t i) { out[i] = solve(params, config, instances[i], mode, derive_seed(seed, i)); });
  return out;
}

}  // namespace movrp::policy
