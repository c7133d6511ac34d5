#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

namespace movrp::policy {

// cci: vehicle/route encoders, fleet context and the joint node-vehicle
// space. simple: graph, previous node, depot, remaining capacity and time.
enum class ContextMode { Cci, Simple };

std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(std::string_view text);

struct ModelConfig {
  std::size_t d_emb = 128;
  std::size_t heads = 8;
  std::size_t ff_hidden = 256;
  std::size_t mlp_hidden = 64;
  std::size_t sa_blocks = 3;
  ContextMode context_mode = ContextMode::Cci;
  // Logits become clip * tanh(logit); 0 disables clipping.
  double logit_clip = 10.0;

  // Throws ConfigError on inconsistent values.
  void validate() const;
  std::size_t context_width() const;
};

// Small model used by tests and desk-scale runs.
ModelConfig desk_model_config();

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace movrp::policy
