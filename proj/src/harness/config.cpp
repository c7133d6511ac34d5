#include "movrp/harness/config.hpp"

#include <cmath>
#include <sstream>

#include "movrp/common/error.hpp"
#include "movrp/vrptw/io.hpp"

namespace movrp::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  if (name != "desk" && name != "full") throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
  RunConfig c;
  c.preset_ = name;
  const bool desk = name == "desk";
  const policy::ModelConfig m = desk ? policy::desk_model_config() : policy::ModelConfig{};
  const train::TrainConfig t = desk ? train::desk_train_config() : train::TrainConfig{};
  const evo::EvoConfig e = desk ? evo::desk_evo_config() : evo::EvoConfig{};
  const auto nsga = desk ? baselines::desk_moea_config(baselines::Algorithm::Nsga2)
                         : baselines::full_moea_config(baselines::Algorithm::Nsga2);
  const auto mogls = desk ? baselines::desk_moea_config(baselines::Algorithm::Mogls)
                          : baselines::full_moea_config(baselines::Algorithm::Mogls);
  auto& v = c.values_;
  v["seed"] = "1";
  v["model.d_emb"] = std::to_string(m.d_emb);
  v["model.heads"] = std::to_string(m.heads);
  v["model.ff_hidden"] = std::to_string(m.ff_hidden);
  v["model.mlp_hidden"] = std::to_string(m.mlp_hidden);
  v["model.sa_blocks"] = std::to_string(m.sa_blocks);
  v["model.context"] = policy::to_string(m.context_mode);
  v["model.logit_clip"] = num(m.logit_clip);
  v["train.subproblems"] = std::to_string(desk ? 3 : t.subproblems);
  v["train.customers"] = std::to_string(t.customers);
  v["train.size_class"] = vrptw::to_string(t.size_class);
  v["train.batch_size"] = std::to_string(t.batch_size);
  v["train.batches_per_epoch"] = std::to_string(t.batches_per_epoch);
  v["train.transfer_batches_per_epoch"] = std::to_string(t.transfer_batches_per_epoch);
  v["train.first_epochs"] = std::to_string(t.first_epochs);
  v["train.transfer_epochs"] = std::to_string(t.transfer_epochs);
  v["train.learning_rate"] = num(t.learning_rate);
  v["train.baseline_threshold"] = num(t.baseline_threshold);
  v["train.baseline_eval_size"] = std::to_string(t.baseline_eval_size);
  v["evo.mutation"] = num(e.mutation);
  v["evo.batch_size"] = std::to_string(e.batch_size);
  v["evo.generations"] = std::to_string(e.generations);
  v["evo.sensitivity_floor"] = num(e.sensitivity_floor);
  v["evo.customers"] = std::to_string(desk ? 20 : 50);
  v["evo.size_class"] = vrptw::to_string(e.size_class);
  v["baseline.population"] = std::to_string(nsga.population);
  v["baseline.iterations"] = std::to_string(nsga.iterations);
  v["baseline.mogls_iterations"] = std::to_string(mogls.iterations);
  v["baseline.crossover_rate"] = num(nsga.crossover_rate);
  v["baseline.mutation_rate"] = num(nsga.mutation_rate);
  v["baseline.neighborhood"] = std::to_string(nsga.neighborhood);
  v["baseline.replacement_limit"] = std::to_string(nsga.replacement_limit);
  v["baseline.elite_size"] = std::to_string(nsga.elite_size);
  v["baseline.local_search_iterations"] = std::to_string(nsga.local_search_iterations);
  v["generate.customers"] = desk ? "20" : "50";
  v["generate.count"] = "1";
  v["generate.size_class"] = "50";
  v["generate.capacity"] = "750";
  v["benchmark.algorithms"] = "policy,nsga2,moead,mogls";
  v["benchmark.reference"] = "auto";
  v["benchmark.reference_factor"] = "1.1";
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = trim(value);
}

void RunConfig::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key == "preset") {
      if (trim(t.substr(eq + 1)) != preset_)
        throw ConfigError(origin + ":" + std::to_string(n) + ": preset must be chosen on the command line");
      continue;
    }
    try {
      set(key, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = vrptw::read_text_file(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  load_text(text, path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::to_text() const {
  std::string out = "preset=" + preset_ + "\n";
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "' expects a finite number, got '" + s + "'");
  return v;
}

std::uint64_t RunConfig::seed() const { return get_size("seed"); }

policy::ModelConfig RunConfig::model() const {
  policy::ModelConfig m;
  m.d_emb = get_size("model.d_emb");
  m.heads = get_size("model.heads");
  m.ff_hidden = get_size("model.ff_hidden");
  m.mlp_hidden = get_size("model.mlp_hidden");
  m.sa_blocks = get_size("model.sa_blocks");
  m.context_mode = policy::context_mode_from_string(get("model.context"));
  m.logit_clip = get_double("model.logit_clip");
  m.validate();
  return m;
}

train::TrainConfig RunConfig::train() const {
  train::TrainConfig t;
  t.subproblems = get_size("train.subproblems");
  t.customers = get_size("train.customers");
  t.size_class = vrptw::size_class_from_string(get("train.size_class"));
  t.batch_size = get_size("train.batch_size");
  t.batches_per_epoch = get_size("train.batches_per_epoch");
  t.transfer_batches_per_epoch = get_size("train.transfer_batches_per_epoch");
  t.first_epochs = get_size("train.first_epochs");
  t.transfer_epochs = get_size("train.transfer_epochs");
  t.learning_rate = get_double("train.learning_rate");
  t.baseline_threshold = get_double("train.baseline_threshold");
  t.baseline_eval_size = get_size("train.baseline_eval_size");
  t.seed = seed();
  t.validate();
  return t;
}

evo::EvoConfig RunConfig::evo() const {
  evo::EvoConfig e;
  e.mutation = get_double("evo.mutation");
  e.batch_size = get_size("evo.batch_size");
  e.generations = get_size("evo.generations");
  e.sensitivity_floor = get_double("evo.sensitivity_floor");
  e.customers = get_size("evo.customers");
  e.size_class = vrptw::size_class_from_string(get("evo.size_class"));
  e.seed = seed();
  e.validate();
  return e;
}

baselines::MoeaConfig RunConfig::baseline(baselines::Algorithm algorithm) const {
  baselines::MoeaConfig b;
  b.population = get_size("baseline.population");
  b.iterations = algorithm == baselines::Algorithm::Mogls ? get_size("baseline.mogls_iterations")
                                                          : get_size("baseline.iterations");
  b.crossover_rate = get_double("baseline.crossover_rate");
  b.mutation_rate = get_double("baseline.mutation_rate");
  b.neighborhood = get_size("baseline.neighborhood");
  b.replacement_limit = get_size("baseline.replacement_limit");
  b.elite_size = get_size("baseline.elite_size");
  b.local_search_iterations = get_size("baseline.local_search_iterations");
  b.seed = seed();
  b.validate();
  return b;
}

GenerateSettings RunConfig::generate() const {
  GenerateSettings g;
  g.customers = get_size("generate.customers");
  g.count = get_size("generate.count");
  g.size_class = vrptw::size_class_from_string(get("generate.size_class"));
  g.custom_capacity = get_double("generate.capacity");
  g.seed = seed();
  if (g.customers == 0) throw ConfigError("generate.customers must be >= 1");
  if (!(g.custom_capacity > 0.0)) throw ConfigError("generate.capacity must be positive");
  return g;
}

BenchmarkSettings RunConfig::benchmark() const {
  BenchmarkSettings b;
  b.algorithms = split(get("benchmark.algorithms"), ',');
  if (b.algorithms.empty()) throw ConfigError("benchmark.algorithms is empty");
  for (const auto& a : b.algorithms)
    if (a != "policy") baselines::algorithm_from_string(a);
  const std::string ref = get("benchmark.reference");
  if (ref != "auto") {
    for (const auto& part : split(ref, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(part, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != part.size() || !std::isfinite(v))
        throw ConfigError("benchmark.reference expects 'auto' or 'f1,f2', got '" + ref + "'");
      b.reference.push_back(v);
    }
    if (b.reference.size() != 2) throw ConfigError("benchmark.reference expects two values");
  }
  b.reference_factor = get_double("benchmark.reference_factor");
  if (!(b.reference_factor > 0.0)) throw ConfigError("benchmark.reference_factor must be positive");
  return b;
}

void RunConfig::validate() const {
  seed();
  model();
  train();
  evo();
  for (auto a : {baselines::Algorithm::Nsga2, baselines::Algorithm::Moead, baselines::Algorithm::Mogls}) baseline(a);
  generate();
  benchmark();
}

}  // namespace movrp::harness
