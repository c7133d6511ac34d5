#include "movrp/policy/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "movrp/common/error.hpp"
#include "movrp/policy/model.hpp"
#include "movrp/vrptw/io.hpp"

namespace movrp::policy {

namespace {

std::filesystem::path blob_path(const std::filesystem::path& manifest) {
  std::filesystem::path p = manifest;
  p.replace_extension(".bin");
  return p;
}

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double get_le(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint32_t crc_of(const std::string& data) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& manifest, const ModelConfig& config, const ad::ParamStore& params,
                     const nlohmann::json& meta) {
  check_params(params, config);
  std::string blob;
  blob.reserve(params.scalar_count() * 8);
  nlohmann::json entries = nlohmann::json::array();
  for (const ad::Parameter& p : params) {
    entries.push_back({{"name", p.name},
                       {"rows", p.shape.rows},
                       {"cols", p.shape.cols},
                       {"offset", blob.size()},
                       {"trainable", p.trainable}});
    for (double v : p.values) put_le(blob, v);
  }
  const std::filesystem::path bin = blob_path(manifest);
  nlohmann::json j{{"version", kCheckpointVersion},
                   {"config", to_json(config)},
                   {"blob", bin.filename().string()},
                   {"blob_bytes", blob.size()},
                   {"crc32", crc_of(blob)},
                   {"parameters", std::move(entries)},
                   {"meta", meta}};
  vrptw::write_text_file(bin, blob);
  vrptw::write_text_file(manifest, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(vrptw::read_text_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw DataError(manifest.string() + ": checkpoint version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
    Checkpoint ck;
    ck.config = model_config_from_json(j.at("config"));
    ck.meta = j.value("meta", nlohmann::json::object());
    const std::string blob = vrptw::read_text_file(manifest.parent_path() / j.at("blob").get<std::string>());
    if (blob.size() != j.at("blob_bytes").get<std::size_t>())
      throw DataError(manifest.string() + ": blob has " + std::to_string(blob.size()) + " bytes, manifest says " +
                      std::to_string(j.at("blob_bytes").get<std::size_t>()));
    if (crc_of(blob) != j.at("crc32").get<std::uint32_t>()) throw DataError(manifest.string() + ": blob crc32 mismatch");
    for (const nlohmann::json& e : j.at("parameters")) {
      const ad::Shape shape{e.at("rows").get<std::size_t>(), e.at("cols").get<std::size_t>()};
      const std::size_t offset = e.at("offset").get<std::size_t>();
      if (offset + shape.size() * 8 > blob.size())
        throw DataError(manifest.string() + ": parameter '" + e.at("name").get<std::string>() + "' runs past the blob");
      std::vector<double> values(shape.size());
      for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_le(blob, offset + 8 * i);
      ck.params.add(e.at("name").get<std::string>(), shape, std::move(values), e.at("trainable").get<bool>());
    }
    try {
      check_params(ck.params, ck.config);
    } catch (const ConfigError& e) {
      throw DataError(manifest.string() + ": " + e.what());
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
}

}  // namespace movrp::policy
