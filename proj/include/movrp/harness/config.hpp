#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "movrp/baselines/baselines.hpp"
#include "movrp/evo/evolve.hpp"
#include "movrp/policy/config.hpp"
#include "movrp/train/trainer.hpp"
#include "movrp/vrptw/instance.hpp"

namespace movrp::harness {

struct GenerateSettings {
  std::size_t customers = 20;
  std::size_t count = 1;
  vrptw::SizeClass size_class = vrptw::SizeClass::N50;
  double custom_capacity = 750.0;
  std::uint64_t seed = 1;
};

struct BenchmarkSettings {
  std::vector<std::string> algorithms;
  // Empty means automatic: reference_factor times the per-instance maximum
  // over every algorithm's front.
  std::vector<double> reference;
  double reference_factor = 1.1;
};

// Flat key=value configuration. Every key has a default from the chosen
// preset; unknown keys and malformed values raise ConfigError.
class RunConfig {
 public:
  // "desk" (scaled-down runs) or "full" (full-scale settings).
  static RunConfig preset(const std::string& name);

  void set(const std::string& key, const std::string& value);
  // "key=value" form.
  void assign(const std::string& assignment);
  // Lines of key=value; blank lines and lines starting with '#' are skipped.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& origin = "config");

  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& preset_name() const { return preset_; }
  // All keys in order, one key=value per line, preset first.
  std::string to_text() const;

  std::uint64_t seed() const;
  policy::ModelConfig model() const;
  train::TrainConfig train() const;
  evo::EvoConfig evo() const;
  baselines::MoeaConfig baseline(baselines::Algorithm algorithm) const;
  GenerateSettings generate() const;
  BenchmarkSettings benchmark() const;

  // Parses every typed section; throws ConfigError on the first bad value.
  void validate() const;

 private:
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;

  std::string preset_;
  std::map<std::string, std::string> values_;
};

}  // namespace movrp::harness
