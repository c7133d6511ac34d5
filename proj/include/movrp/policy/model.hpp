#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "movrp/ad/param_store.hpp"
#include "movrp/ad/tensor.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::policy {

// x, y, window open, window close, demand.
inline constexpr std::size_t kNodeFeatures = 5;
// vehicle index, return distance, position x, position y, current time.
inline constexpr std::size_t kVehicleFeatures = 5;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, unit
// batch-norm scale. Deterministic in `seed`.
ad::ParamStore init_params(const ModelConfig& config, std::uint64_t seed);

// Throws ConfigError unless `params` has exactly the layout init_params
// would produce for `config`.
void check_params(const ad::ParamStore& params, const ModelConfig& config);

// Row-major (N + 1) x kNodeFeatures.
std::vector<double> node_features(const vrptw::Instance& instance);
std::array<double, kVehicleFeatures> vehicle_features(const vrptw::Instance& instance,
                                                      const vrptw::VehicleState& vehicle);

// Running-statistics refresh produced by one train-mode encoder pass.
struct NormUpdate {
  std::size_t mean_slot = 0;
  std::size_t var_slot = 0;
  ad::BatchStats stats;
};

void apply_norm_updates(ad::ParamStore& params, const std::vector<NormUpdate>& updates,
                        double momentum = ad::kBatchNormMomentum);

// Node embeddings of several instances stacked by rows. Attention never
// crosses instance boundaries; train-mode batch norm pools all rows.
struct EncodedBatch {
  ad::Tensor nodes;
  std::vector<std::size_t> offsets;  // instance b owns rows [offsets[b], offsets[b + 1])
  std::vector<NormUpdate> norm_updates;

  std::size_t batch_size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  ad::Tensor instance(std::size_t b) const;
};

// Throws DataError on non-finite features.
EncodedBatch encode_nodes(ad::Tape& tape, const ad::ParamStore& params, const ModelConfig& config,
                          std::span<const vrptw::Instance* const> instances, ad::NormMode norm);
ad::Tensor encode_nodes(ad::Tape& tape, const ad::ParamStore& params, const ModelConfig& config,
                        const vrptw::Instance& instance, ad::NormMode norm);

// Route term of a vehicle: mean of g_l over its route, or the learned
// empty-route vector. `route_codes` is g_l applied to every node row.
ad::Tensor encode_route(ad::Tape& tape, const ad::ParamStore& params, const ad::Tensor& route_codes,
                        const vrptw::Route& route);
// [g_v(d_k); route term], width d_emb.
ad::Tensor encode_vehicle(ad::Tape& tape, const ad::ParamStore& params, const vrptw::Instance& instance,
                          const vrptw::VehicleState& vehicle, const vrptw::Route& route,
                          const ad::Tensor& route_codes);
// g_l applied row-wise, width d_emb / 2.
ad::Tensor route_codes(ad::Tape& tape, const ad::ParamStore& params, const ad::Tensor& node_emb);

// Row i: W1 h_i + W2 h_cur + W3 [h_cur * h_i ; h_cur . h_i].
ad::Tensor joint_space(ad::Tape& tape, const ad::ParamStore& params, const ad::Tensor& h_cur,
                       const ad::Tensor& node_emb);

// Attention glimpse of the context over `keys_source`, then single-head
// compatibilities, optional tanh clipping and masked log-softmax. Returns a
// 1 x rows(keys_source) row of log-probabilities; masked entries carry
// ad::kBlockedLogit-level values whose exponent is exactly 0.
ad::Tensor decode_step(ad::Tape& tape, const ad::ParamStore& params, const ModelConfig& config,
                       const ad::Tensor& context, const ad::Tensor& keys_source, const vrptw::Mask& mask);

// Per-episode decoding helper. Caches per-instance terms and the embeddings
// of closed vehicles; use one instance per episode.
class EpisodeDecoder {
 public:
  EpisodeDecoder(ad::Tape& tape, const ad::ParamStore& params, const ModelConfig& config,
                 const vrptw::Instance& instance, ad::Tensor node_emb);

  // Context row for the current state (width config.context_width()).
  ad::Tensor context(const vrptw::RoutingState& state);
  // Current vehicle embedding (cci mode).
  ad::Tensor current_vehicle(const vrptw::RoutingState& state);
  // Node sequence the decoder attends over: the joint space in cci mode, the
  // node embeddings in simple mode.
  ad::Tensor keys_source(const vrptw::RoutingState& state);
  ad::Tensor log_probs(const vrptw::RoutingState& state, const vrptw::Mask& mask);
  ad::Tensor log_probs(const vrptw::RoutingState& state) { return log_probs(state, state.mask()); }

  const ad::Tensor& node_embeddings() const { return node_emb_; }

 private:
  void sync_closed(const vrptw::RoutingState& state);

  ad::Tape* tape_;
  const ad::ParamStore* params_;
  ModelConfig config_;
  const vrptw::Instance* instance_;
  ad::Tensor node_emb_;
  ad::Tensor graph_;
  ad::Tensor depot_;
  ad::Tensor codes_;
  std::vector<ad::Tensor> closed_;
};

}  // namespace movrp::policy
