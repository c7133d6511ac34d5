#include "movrp/policy/config.hpp"

#include <cmath>

#include "movrp/common/error.hpp"

namespace movrp::policy {

std::string to_string(ContextMode mode) { return mode == ContextMode::Cci ? "cci" : "simple"; }

ContextMode context_mode_from_string(std::string_view text) {
  if (text == "cci") return ContextMode::Cci;
  if (text == "simple") return ContextMode::Simple;
  throw ConfigError("unknown context mode '" + std::string(text) + "' (expected cci or simple)");
}

void ModelConfig::validate() const {
  if (d_emb == 0 || heads == 0) throw ConfigError("model: d_emb and heads must be positive");
  if (d_emb % heads != 0) throw ConfigError("model: d_emb must be divisible by heads");
  if (d_emb % 2 != 0) throw ConfigError("model: d_emb must be even");
  if (ff_hidden == 0 || mlp_hidden == 0) throw ConfigError("model: hidden widths must be positive");
  if (sa_blocks != 3) throw ConfigError("model: the node encoder has exactly 3 self-attention blocks");
  if (!(logit_clip >= 0.0) || !std::isfinite(logit_clip)) throw ConfigError("model: logit_clip must be >= 0");
}

std::size_t ModelConfig::context_width() const {
  return context_mode == ContextMode::Cci ? 5 * d_emb : 3 * d_emb + 2;
}

ModelConfig desk_model_config() {
  ModelConfig c;
  c.d_emb = 32;
  c.heads = 2;
  c.ff_hidden = 64;
  c.mlp_hidden = 16;
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"d_emb", c.d_emb},           {"heads", c.heads},
          {"ff_hidden", c.ff_hidden},   {"mlp_hidden", c.mlp_hidden},
          {"sa_blocks", c.sa_blocks},   {"context_mode", to_string(c.context_mode)},
          {"logit_clip", c.logit_clip}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.d_emb = j.at("d_emb").get<std::size_t>();
    c.heads = j.at("heads").get<std::size_t>();
    c.ff_hidden = j.at("ff_hidden").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.sa_blocks = j.at("sa_blocks").get<std::size_t>();
    c.context_mode = context_mode_from_string(j.at("context_mode").get<std::string>());
    c.logit_clip = j.at("logit_clip").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
}

}  // namespace movrp::policy
