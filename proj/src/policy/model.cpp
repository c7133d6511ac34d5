#include "movrp/policy/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::policy {

using ad::NormMode;
using ad::ParamStore;
using ad::Shape;
using ad::Tape;
using ad::Tensor;

namespace {

enum class Init { Weight, Zero, One };

struct Slot {
  std::string name;
  Shape shape;
  Init init;
  bool trainable = true;
};

void add_norm(std::vector<Slot>& out, const std::string& prefix, std::size_t d) {
  out.push_back({prefix + ".gamma", {1, d}, Init::One});
  out.push_back({prefix + ".beta", {1, d}, Init::Zero});
  out.push_back({prefix + ".running_mean", {1, d}, Init::Zero, false});
  out.push_back({prefix + ".running_var", {1, d}, Init::One, false});
}

std::string block_prefix(std::size_t l) { return "enc.block" + std::to_string(l); }

std::vector<Slot> layout(const ModelConfig& c) {
  const std::size_t d = c.d_emb, half = d / 2, h = c.mlp_hidden;
  std::vector<Slot> s;
  s.push_back({"enc.in.W", {kNodeFeatures, d}, Init::Weight});
  s.push_back({"enc.in.b", {1, d}, Init::Zero});
  for (std::size_t l = 0; l < c.sa_blocks; ++l) {
    const std::string p = block_prefix(l);
    for (const char* w : {".mha.Wq", ".mha.Wk", ".mha.Wv", ".mha.Wo"}) s.push_back({p + w, {d, d}, Init::Weight});
    add_norm(s, p + ".bn1", d);
    s.push_back({p + ".ff.W1", {d, c.ff_hidden}, Init::Weight});
    s.push_back({p + ".ff.b1", {1, c.ff_hidden}, Init::Zero});
    s.push_back({p + ".ff.W2", {c.ff_hidden, d}, Init::Weight});
    s.push_back({p + ".ff.b2", {1, d}, Init::Zero});
    add_norm(s, p + ".bn2", d);
  }
  if (c.context_mode == ContextMode::Cci) {
    s.push_back({"vehicle.W1", {kVehicleFeatures, h}, Init::Weight});
    s.push_back({"vehicle.b1", {1, h}, Init::Zero});
    s.push_back({"vehicle.W2", {h, h}, Init::Weight});
    s.push_back({"vehicle.b2", {1, h}, Init::Zero});
    s.push_back({"vehicle.W3", {h, half}, Init::Weight});
    s.push_back({"vehicle.b3", {1, half}, Init::Zero});
    s.push_back({"route.W1", {d, h}, Init::Weight});
    s.push_back({"route.b1", {1, h}, Init::Zero});
    s.push_back({"route.W2", {h, half}, Init::Weight});
    s.push_back({"route.b2", {1, half}, Init::Zero});
    s.push_back({"ctx.empty_route", {1, half}, Init::Weight});
    s.push_back({"ctx.no_last", {1, d}, Init::Weight});
    s.push_back({"joint.W1", {d, d}, Init::Weight});
    s.push_back({"joint.W2", {d, d}, Init::Weight});
    s.push_back({"joint.W3", {d + 1, d}, Init::Weight});
  } else {
    s.push_back({"ctx.no_prev", {1, d}, Init::Weight});
  }
  s.push_back({"dec.Wq", {c.context_width(), d}, Init::Weight});
  for (const char* w : {"dec.Wk", "dec.Wv", "dec.Wo", "dec.Wc"}) s.push_back({w, {d, d}, Init::Weight});
  return s;
}

Tensor P(Tape& tape, const ParamStore& params, const std::string& name) { return tape.param(params, name); }

Tensor affine(Tape& tape, const ParamStore& params, const Tensor& x, const std::string& w, const std::string& b) {
  return ad::add(ad::matmul(x, P(tape, params, w)), P(tape, params, b));
}

Tensor norm_layer(Tape& tape, const ParamStore& params, const std::string& prefix, const Tensor& x, NormMode mode,
                  std::vector<NormUpdate>& updates) {
  const std::size_t mean_slot = *params.find(prefix + ".running_mean");
  const std::size_t var_slot = *params.find(prefix + ".running_var");
  Tensor gamma = P(tape, params, prefix + ".gamma");
  Tensor beta = P(tape, params, prefix + ".beta");
  if (mode == NormMode::Eval)
    return ad::batch_norm(x, gamma, beta, mode, params[mean_slot].values, params[var_slot].values);
  NormUpdate u{mean_slot, var_slot, {}};
  Tensor out = ad::batch_norm(x, gamma, beta, mode, params[mean_slot].values, params[var_slot].values, &u.stats);
  updates.push_back(std::move(u));
  return out;
}

// Self-attention restricted to each instance's row block.
Tensor self_attention(Tape& tape, const ParamStore& params, const std::string& prefix, const Tensor& h,
                      const std::vector<std::size_t>& offsets, std::size_t heads) {
  const std::size_t d = h.cols(), dk = d / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dk));
  Tensor q = ad::matmul(h, P(tape, params, prefix + ".Wq"));
  Tensor k = ad::matmul(h, P(tape, params, prefix + ".Wk"));
  Tensor v = ad::matmul(h, P(tape, params, prefix + ".Wv"));
  std::vector<Tensor> blocks;
  std::vector<Tensor> per_head(heads);
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    Tensor qb = ad::slice_rows(q, offsets[b], offsets[b + 1]);
    Tensor kb = ad::slice_rows(k, offsets[b], offsets[b + 1]);
    Tensor vb = ad::slice_rows(v, offsets[b], offsets[b + 1]);
    for (std::size_t z = 0; z < heads; ++z) {
      Tensor qz = heads == 1 ? qb : ad::slice_cols(qb, z * dk, (z + 1) * dk);
      Tensor kz = heads == 1 ? kb : ad::slice_cols(kb, z * dk, (z + 1) * dk);
      Tensor vz = heads == 1 ? vb : ad::slice_cols(vb, z * dk, (z + 1) * dk);
      Tensor attn = ad::masked_softmax(ad::scale(ad::matmul(qz, ad::transpose(kz)), inv));
      per_head[z] = ad::matmul(attn, vz);
    }
    blocks.push_back(heads == 1 ? per_head[0] : ad::concat_cols(per_head));
  }
  Tensor joined = blocks.size() == 1 ? blocks[0] : ad::concat_rows(blocks);
  return ad::matmul(joined, P(tape, params, prefix + ".Wo"));
}

}  // namespace

ParamStore init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ParamStore params;
  for (const Slot& s : layout(config)) {
    std::vector<double> v(s.shape.size(), 0.0);
    if (s.init == Init::One) {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (s.init == Init::Weight) {
      // Placeholder rows draw with fan-in equal to their width.
      const std::size_t fan = s.shape.rows == 1 ? s.shape.cols : s.shape.rows;
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (double& x : v) x = u(rng);
    }
    params.add(s.name, s.shape, std::move(v), s.trainable);
  }
  return params;
}

void check_params(const ParamStore& params, const ModelConfig& config) {
  config.validate();
  const auto expected = layout(config);
  if (params.size() != expected.size())
    throw ConfigError("parameters do not match model config: expected " + std::to_string(expected.size()) +
                      " entries, found " + std::to_string(params.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& p = params[i];
    const auto& e = expected[i];
    if (p.name != e.name || !(p.shape == e.shape) || p.trainable != e.trainable)
      throw ConfigError("parameters do not match model config at '" + e.name + "' (found '" + p.name + "' " +
                        ad::to_string(p.shape) + ")");
    for (double x : p.values)
      if (!std::isfinite(x)) throw NumericError("parameter '" + p.name + "' holds a non-finite value");
  }
}

std::vector<double> node_features(const vrptw::Instance& instance) {
  std::vector<double> f;
  f.reserve(instance.node_count() * kNodeFeatures);
  for (const vrptw::Node& n : instance.nodes) {
    for (double v : {n.coords.x, n.coords.y, n.tw_open, n.tw_close, n.demand}) {
      if (!std::isfinite(v)) throw DataError("encode_nodes: non-finite node feature");
      f.push_back(v);
    }
  }
  return f;
}

std::array<double, kVehicleFeatures> vehicle_features(const vrptw::Instance& instance,
                                                      const vrptw::VehicleState& v) {
  const vrptw::Point& at = instance.nodes[v.position].coords;
  return {static_cast<double>(v.vehicle_index), v.return_distance, at.x, at.y, v.current_time};
}

void apply_norm_updates(ParamStore& params, const std::vector<NormUpdate>& updates, double momentum) {
  for (const NormUpdate& u : updates) {
    auto& mean = params[u.mean_slot].values;
    auto& var = params[u.var_slot].values;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] = (1.0 - momentum) * mean[i] + momentum * u.stats.mean[i];
      var[i] = (1.0 - momentum) * var[i] + momentum * u.stats.var_unbiased[i];
    }
  }
}

Tensor EncodedBatch::instance(std::size_t b) const {
  if (batch_size() == 1) return nodes;
  return ad::slice_rows(nodes, offsets[b], offsets[b + 1]);
}

EncodedBatch encode_nodes(Tape& tape, const ParamStore& params, const ModelConfig& config,
                          std::span<const vrptw::Instance* const> instances, NormMode norm) {
  if (instances.empty()) throw Error("encode_nodes: empty batch");
  EncodedBatch out;
  std::vector<double> feats;
  out.offsets.push_back(0);
  for (const vrptw::Instance* inst : instances) {
    const auto f = node_features(*inst);
    feats.insert(feats.end(), f.begin(), f.end());
    out.offsets.push_back(out.offsets.back() + inst->node_count());
  }
  const std::size_t rows = out.offsets.back();
  Tensor h = affine(tape, params, tape.constant({rows, kNodeFeatures}, std::move(feats)), "enc.in.W", "enc.in.b");
  for (std::size_t l = 0; l < config.sa_blocks; ++l) {
    const std::string p = block_prefix(l);
    Tensor att = self_attention(tape, params, p + ".mha", h, out.offsets, config.heads);
    h = norm_layer(tape, params, p + ".bn1", ad::add(h, att), norm, out.norm_updates);
    Tensor ff = affine(tape, params, ad::relu(affine(tape, params, h, p + ".ff.W1", p + ".ff.b1")), p + ".ff.W2",
                       p + ".ff.b2");
    h = norm_layer(tape, params, p + ".bn2", ad::add(h, ff), norm, out.norm_updates);
  }
  out.nodes = h;
  return out;
}

Tensor encode_nodes(Tape& tape, const ParamStore& params, const ModelConfig& config, const vrptw::Instance& instance,
                    NormMode norm) {
  const vrptw::Instance* one[] = {&instance};
  return encode_nodes(tape, params, config, one, norm).nodes;
}

Tensor route_codes(Tape& tape, const ParamStore& params, const Tensor& node_emb) {
  return affine(tape, params, ad::relu(affine(tape, params, node_emb, "route.W1", "route.b1")), "route.W2",
                "route.b2");
}

Tensor encode_route(Tape& tape, const ParamStore& params, const Tensor& codes, const vrptw::Route& route) {
  if (route.empty()) return P(tape, params, "ctx.empty_route");
  if (route.size() == 1) return ad::slice_rows(codes, route[0], route[0] + 1);
  return ad::mean_rows(ad::select_rows(codes, route));
}

Tensor encode_vehicle(Tape& tape, const ParamStore& params, const vrptw::Instance& instance,
                      const vrptw::VehicleState& vehicle, const vrptw::Route& route, const Tensor& codes) {
  const auto f = vehicle_features(instance, vehicle);
  Tensor x = tape.constant({1, kVehicleFeatures}, std::vector<double>(f.begin(), f.end()));
  x = ad::relu(affine(tape, params, x, "vehicle.W1", "vehicle.b1"));
  x = ad::relu(affine(tape, params, x, "vehicle.W2", "vehicle.b2"));
  x = affine(tape, params, x, "vehicle.W3", "vehicle.b3");
  return ad::concat_cols({x, encode_route(tape, params, codes, route)});
}

Tensor joint_space(Tape& tape, const ParamStore& params, const Tensor& h_cur, const Tensor& node_emb) {
  Tensor own = ad::matmul(node_emb, P(tape, params, "joint.W1"));
  Tensor shared = ad::matmul(h_cur, P(tape, params, "joint.W2"));
  Tensor inter = ad::concat_cols({ad::mul(node_emb, h_cur), ad::matmul(node_emb, ad::transpose(h_cur))});
  return ad::add(ad::add(own, ad::matmul(inter, P(tape, params, "joint.W3"))), shared);
}

Tensor decode_step(Tape& tape, const ParamStore& params, const ModelConfig& config, const Tensor& context,
                   const Tensor& keys_source, const vrptw::Mask& mask) {
  const std::size_t d = config.d_emb, heads = config.heads, dk = d / heads;
  Tensor q = ad::matmul(context, P(tape, params, "dec.Wq"));
  Tensor k = ad::matmul(keys_source, P(tape, params, "dec.Wk"));
  Tensor v = ad::matmul(keys_source, P(tape, params, "dec.Wv"));
  const double inv = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> per_head(heads);
  for (std::size_t z = 0; z < heads; ++z) {
    Tensor qz = heads == 1 ? q : ad::slice_cols(q, z * dk, (z + 1) * dk);
    Tensor kz = heads == 1 ? k : ad::slice_cols(k, z * dk, (z + 1) * dk);
    Tensor vz = heads == 1 ? v : ad::slice_cols(v, z * dk, (z + 1) * dk);
    per_head[z] = ad::matmul(ad::masked_softmax(ad::scale(ad::matmul(qz, ad::transpose(kz)), inv), mask), vz);
  }
  Tensor glimpse = ad::matmul(heads == 1 ? per_head[0] : ad::concat_cols(per_head), P(tape, params, "dec.Wo"));
  Tensor keys = ad::matmul(keys_source, P(tape, params, "dec.Wc"));
  Tensor logits = ad::scale(ad::matmul(glimpse, ad::transpose(keys)), 1.0 / std::sqrt(static_cast<double>(d)));
  if (config.logit_clip > 0.0) logits = ad::scale(ad::tanh(logits), config.logit_clip);
  return ad::masked_log_softmax(logits, mask);
}

EpisodeDecoder::EpisodeDecoder(Tape& tape, const ParamStore& params, const ModelConfig& config,
                               const vrptw::Instance& instance, Tensor node_emb)
    : tape_(&tape), params_(&params), config_(config), instance_(&instance), node_emb_(node_emb) {
  if (node_emb.rows() != instance.node_count() || node_emb.cols() != config.d_emb)
    throw ShapeError("EpisodeDecoder: node embeddings " + ad::to_string(node_emb.shape()) + " do not fit instance");
  graph_ = ad::mean_rows(node_emb_);
  depot_ = ad::slice_rows(node_emb_, 0, 1);
  if (config_.context_mode == ContextMode::Cci) codes_ = route_codes(tape, params, node_emb_);
}

void EpisodeDecoder::sync_closed(const vrptw::RoutingState& state) {
  const auto& vehicles = state.closed_vehicles();
  if (closed_.size() > vehicles.size()) closed_.clear();
  for (std::size_t k = closed_.size(); k < vehicles.size(); ++k)
    closed_.push_back(encode_vehicle(*tape_, *params_, *instance_, vehicles[k], state.closed_routes()[k], codes_));
}

Tensor EpisodeDecoder::current_vehicle(const vrptw::RoutingState& state) {
  if (config_.context_mode != ContextMode::Cci) throw Error("current_vehicle: only defined in cci mode");
  return encode_vehicle(*tape_, *params_, *instance_, state.vehicle(), state.current_route(), codes_);
}

namespace {

Tensor cci_context(Tape& tape, const ParamStore& params, const Tensor& graph, const Tensor& depot,
                   const Tensor& node_emb, const std::vector<Tensor>& closed, const Tensor& cur,
                   const vrptw::RoutingState& state) {
  Tensor fleet = cur;
  if (!closed.empty()) {
    std::vector<Tensor> all(closed);
    all.push_back(cur);
    fleet = ad::mean_rows(ad::concat_rows(all));
  }
  std::vector<std::size_t> lasts;
  for (const auto& r : state.closed_routes()) lasts.push_back(r.back());
  if (!state.current_route().empty()) lasts.push_back(state.current_route().back());
  Tensor last = lasts.empty() ? P(tape, params, "ctx.no_last") : ad::mean_rows(ad::select_rows(node_emb, lasts));
  return ad::concat_cols({graph, fleet, cur, depot, last});
}

}  // namespace

Tensor EpisodeDecoder::context(const vrptw::RoutingState& state) {
  if (config_.context_mode == ContextMode::Cci) {
    sync_closed(state);
    return cci_context(*tape_, *params_, graph_, depot_, node_emb_, closed_, current_vehicle(state), state);
  }
  const auto prev = state.last_action();
  Tensor h_prev = prev ? ad::slice_rows(node_emb_, *prev, *prev + 1) : P(*tape_, *params_, "ctx.no_prev");
  Tensor scalars = tape_->constant({1, 2}, {state.vehicle().remaining_capacity, state.vehicle().current_time});
  return ad::concat_cols({graph_, h_prev, depot_, scalars});
}

Tensor EpisodeDecoder::keys_source(const vrptw::RoutingState& state) {
  if (config_.context_mode != ContextMode::Cci) return node_emb_;
  return joint_space(*tape_, *params_, current_vehicle(state), node_emb_);
}

Tensor EpisodeDecoder::log_probs(const vrptw::RoutingState& state, const vrptw::Mask& mask) {
  if (config_.context_mode != ContextMode::Cci)
    return decode_step(*tape_, *params_, config_, context(state), node_emb_, mask);
  sync_closed(state);
  Tensor cur = current_vehicle(state);
  Tensor ctx = cci_context(*tape_, *params_, graph_, depot_, node_emb_, closed_, cur, state);
  return decode_step(*tape_, *params_, config_, ctx, joint_space(*tape_, *params_, cur, node_emb_), mask);
}

}  // namespace movrp::policy
