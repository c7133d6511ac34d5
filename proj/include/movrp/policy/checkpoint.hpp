#pragma once

#include <filesystem>

#include <json.hpp>

#include "movrp/ad/param_store.hpp"
#include "movrp/policy/config.hpp"

namespace movrp::policy {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ad::ParamStore params;
  nlohmann::json meta = nlohmann::json::object();
};

// Writes `<stem>.json` (manifest: version, config, ordered names, shapes,
// byte offsets, trainable flags, blob crc32, meta) and `<stem>.bin`
// (little-endian float64 values in manifest order). `manifest` is the .json
// path; the blob sits next to it.
void save_checkpoint(const std::filesystem::path& manifest, const ModelConfig& config, const ad::ParamStore& params,
                     const nlohmann::json& meta = nlohmann::json::object());

// Throws DataError on a missing file, version mismatch, crc mismatch,
// truncated blob or a layout that does not match the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& manifest);

}  // namespace movrp::policy
