#include "movrp/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "movrp/common/error.hpp"
#include "movrp/vrptw/state.hpp"

namespace movrp::baselines {

std::size_t token_count(std::size_t customers) { return customers == 0 ? 0 : 2 * customers - 1; }

GiantTour random_giant_tour(std::size_t customers, std::mt19937_64& rng) {
  GiantTour t;
  t.tokens.resize(token_count(customers));
  std::iota(t.tokens.begin(), t.tokens.end(), std::size_t{1});
  std::shuffle(t.tokens.begin(), t.tokens.end(), rng);
  return t;
}

void check_giant_tour(const GiantTour& tour, std::size_t customers) {
  const std::size_t n = token_count(customers);
  if (tour.tokens.size() != n) throw Error("giant tour: expected " + std::to_string(n) + " tokens");
  std::vector<std::uint8_t> seen(n + 1, 0);
  for (std::size_t t : tour.tokens) {
    if (t == 0 || t > n || seen[t]) throw Error("giant tour: not a permutation of the tokens");
    seen[t] = 1;
  }
}

vrptw::Solution decode(const vrptw::Instance& instance, const GiantTour& tour) {
  const std::size_t n = instance.customer_count();
  vrptw::Solution sol;
  vrptw::Route current;
  vrptw::VehicleState v = vrptw::fresh_vehicle(instance);
  const auto close = [&] {
    if (current.empty()) return;
    sol.routes.push_back(std::move(current));
    current.clear();
    v = vrptw::fresh_vehicle(instance, sol.routes.size() + 1);
  };
  for (std::size_t t : tour.tokens) {
    if (t > n) {
      close();
      continue;
    }
    if (!vrptw::can_serve(instance, v, t)) {
      close();
      if (!vrptw::can_serve(instance, v, t))
        throw DataError("instance infeasible: customer " + std::to_string(t) + " cannot be served by a fresh vehicle");
    }
    v = vrptw::advance(instance, v, t);
    current.push_back(t);
  }
  close();
  return sol;
}

GiantTour encode(const vrptw::Instance& instance, const vrptw::Solution& solution) {
  const std::size_t n = instance.customer_count();
  GiantTour t;
  std::size_t sep = n + 1;
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    if (r > 0) t.tokens.push_back(sep++);
    t.tokens.insert(t.tokens.end(), solution.routes[r].begin(), solution.routes[r].end());
  }
  while (sep <= token_count(n)) t.tokens.push_back(sep++);
  check_giant_tour(t, n);
  return t;
}

std::vector<std::size_t> order_crossover(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                         std::mt19937_64& rng) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error("order_crossover: parents differ in length");
  if (n < 2) return a;
  std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  if (i > j) std::swap(i, j);
  std::vector<std::size_t> child(n, 0);
  std::vector<std::uint8_t> used(n + 2, 0);
  for (std::size_t k = i; k <= j; ++k) {
    child[k] = a[k];
    used[a[k]] = 1;
  }
  // Fill from b starting after the slice, wrapping around.
  std::size_t pos = (j + 1) % n;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t gene = b[(j + 1 + k) % n];
    if (used[gene]) continue;
    child[pos] = gene;
    pos = (pos + 1) % n;
  }
  return child;
}

void mutate(std::vector<std::size_t>& tokens, std::mt19937_64& rng) {
  const std::size_t n = tokens.size();
  if (n < 2) return;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const bool swap = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
  const std::size_t i = pick(rng), j = pick(rng);
  if (swap) {
    std::swap(tokens[i], tokens[j]);
  } else {
    const std::size_t gene = tokens[i];
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(j), gene);
  }
}

bool route_feasible(const vrptw::Instance& instance, const vrptw::Route& route) {
  vrptw::VehicleState v = vrptw::fresh_vehicle(instance);
  for (std::size_t c : route) {
    if (c == 0 || c >= instance.node_count() || !vrptw::can_serve(instance, v, c)) return false;
    v = vrptw::advance(instance, v, c);
  }
  return true;
}

vrptw::Route two_opt(const vrptw::Route& route, const vrptw::Instance& instance, std::size_t max_iterations) {
  vrptw::Route best = route;
  const std::size_t n = best.size();
  if (n < 2) return best;
  const auto node = [&](const vrptw::Route& r, std::ptrdiff_t k) -> std::size_t {
    return k < 0 || k >= static_cast<std::ptrdiff_t>(r.size()) ? 0 : r[static_cast<std::size_t>(k)];
  };
  double best_len = vrptw::route_distance(instance, best);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    struct Move {
      double delta;
      std::size_t i, j;
    };
    std::vector<Move> moves;
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t before = node(best, static_cast<std::ptrdiff_t>(i) - 1);
        const std::size_t after = node(best, static_cast<std::ptrdiff_t>(j) + 1);
        const double delta = instance.distance(before, best[j]) + instance.distance(best[i], after) -
                             instance.distance(before, best[i]) - instance.distance(best[j], after);
        if (delta < -1e-12) moves.push_back({delta, i, j});
      }
    std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.delta < b.delta; });
    bool applied = false;
    for (const Move& m : moves) {
      vrptw::Route cand = best;
      std::reverse(cand.begin() + static_cast<std::ptrdiff_t>(m.i), cand.begin() + static_cast<std::ptrdiff_t>(m.j) + 1);
      const double len = vrptw::route_distance(instance, cand);
      if (len >= best_len || !route_feasible(instance, cand)) continue;
      best = std::move(cand);
      best_len = len;
      applied = true;
      break;
    }
    if (!applied) break;
  }
  return best;
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Nsga2: return "nsga2";
    case Algorithm::Moead: return "moead";
    case Algorithm::Mogls: return "mogls";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "nsga2") return Algorithm::Nsga2;
  if (s == "moead") return Algorithm::Moead;
  if (s == "mogls") return Algorithm::Mogls;
  throw ConfigError("unknown algorithm '" + s + "' (expected nsga2, moead or mogls)");
}

void MoeaConfig::validate() const {
  if (population == 0) throw ConfigError("baseline population must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("crossover rate must be in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation rate must be in [0, 1]");
  if (neighborhood == 0) throw ConfigError("neighborhood size must be >= 1");
  if (replacement_limit == 0) throw ConfigError("replacement limit must be >= 1");
  if (elite_size == 0) throw ConfigError("MOGLS elite size must be >= 1");
}

MoeaConfig desk_moea_config(Algorithm a) {
  MoeaConfig c;
  c.iterations = a == Algorithm::Mogls ? 100 : 500;
  return c;
}

MoeaConfig full_moea_config(Algorithm a) {
  MoeaConfig c;
  c.iterations = a == Algorithm::Mogls ? 4000 : 20000;
  return c;
}

namespace {

struct Candidate {
  std::vector<std::size_t> tokens;
  vrptw::Solution solution;
  pareto::Fitness fitness;
};

class Archive {
 public:
  void offer(const Candidate& c) {
    for (const auto& e : entries_)
      if (e.fitness == c.fitness || pareto::dominates(e.fitness, c.fitness)) return;
    std::erase_if(entries_, [&](const Candidate& e) { return pareto::dominates(c.fitness, e.fitness); });
    entries_.push_back(c);
  }

  BaselineResult result(std::size_t evaluations) const {
    BaselineResult r;
    std::vector<pareto::Fitness> pts;
    std::vector<std::size_t> payloads;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      r.solutions.push_back(entries_[i].solution);
      pts.push_back(entries_[i].fitness);
      payloads.push_back(i);
    }
    r.front = pareto::ParetoFront(pts, payloads);
    r.evaluations = evaluations;
    return r;
  }

 private:
  std::vector<Candidate> entries_;
};

class Search {
 public:
  Search(const vrptw::Instance& instance, const MoeaConfig& config)
      : instance_(instance), config_(config), rng_(config.seed) {
    config.validate();
    vrptw::check_instance(instance);
  }

  Candidate make(std::vector<std::size_t> tokens) {
    Candidate c;
    c.solution = decode(instance_, GiantTour{tokens});
    c.tokens = std::move(tokens);
    const auto f = vrptw::evaluate_solution(instance_, c.solution);
    c.fitness = {f.f1, f.f2};
    ++evaluations_;
    archive_.offer(c);
    return c;
  }

  Candidate random() { return make(random_giant_tour(instance_.customer_count(), rng_).tokens); }

  Candidate offspring(const Candidate& a, const Candidate& b, bool always_cross = false) {
    std::vector<std::size_t> child =
        always_cross || unit() < config_.crossover_rate ? order_crossover(a.tokens, b.tokens, rng_) : a.tokens;
    if (unit() < config_.mutation_rate) mutate(child, rng_);
    return make(std::move(child));
  }

  // Decodes, applies 2-opt to each route and re-encodes.
  Candidate improve(const Candidate& c) {
    vrptw::Solution s = c.solution;
    for (auto& r : s.routes) r = two_opt(r, instance_, config_.local_search_iterations);
    return make(encode(instance_, s).tokens);
  }

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  BaselineResult result() const { return archive_.result(evaluations_); }
  const MoeaConfig& config() const { return config_; }

 private:
  const vrptw::Instance& instance_;
  MoeaConfig config_;
  std::mt19937_64 rng_;
  Archive archive_;
  std::size_t evaluations_ = 0;
};

double weighted(const pareto::Fitness& f, const std::array<double, 2>& w) { return w[0] * f[0] + w[1] * f[1]; }

}  // namespace

BaselineResult nsga2_solve(const vrptw::Instance& instance, const MoeaConfig& config) {
  Search s(instance, config);
  const std::size_t p = config.population;
  std::vector<Candidate> pop;
  for (std::size_t i = 0; i < p; ++i) pop.push_back(s.random());

  for (std::size_t it = 0; it < config.iterations; ++it) {
    std::vector<pareto::Fitness> fit;
    for (const auto& c : pop) fit.push_back(c.fitness);
    const auto rc = pareto::rank_and_crowding(fit);
    const auto tournament = [&] {
      const std::size_t a = s.index(pop.size()), b = s.index(pop.size());
      if (rc.rank[a] != rc.rank[b]) return rc.rank[a] < rc.rank[b] ? a : b;
      if (rc.crowding[a] != rc.crowding[b]) return rc.crowding[a] > rc.crowding[b] ? a : b;
      return std::min(a, b);
    };
    std::vector<Candidate> all = pop;
    for (std::size_t k = 0; k < p; ++k) {
      const std::size_t a = tournament(), b = tournament();
      all.push_back(s.offspring(pop[a], pop[b]));
    }
    fit.clear();
    for (const auto& c : all) fit.push_back(c.fitness);
    std::vector<std::size_t> tags(all.size());
    std::iota(tags.begin(), tags.end(), 0);
    std::vector<Candidate> next;
    for (std::size_t i : pareto::nsga2_select(fit, tags, p)) next.push_back(std::move(all[i]));
    pop = std::move(next);
  }
  return s.result();
}

BaselineResult moead_solve(const vrptw::Instance& instance, const MoeaConfig& config) {
  Search s(instance, config);
  const std::size_t p = config.population;
  std::vector<std::array<double, 2>> w(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double t = p == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(p - 1);
    w[i] = {1.0 - t, t};
  }
  const std::size_t t_size = std::min(config.neighborhood, p);
  std::vector<std::vector<std::size_t>> hood(p);
  for (std::size_t i = 0; i < p; ++i) {
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    const auto dist = [&](std::size_t j) { return std::hypot(w[i][0] - w[j][0], w[i][1] - w[j][1]); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
    hood[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t_size));
  }
  std::vector<Candidate> pop;
  for (std::size_t i = 0; i < p; ++i) pop.push_back(s.random());

  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < p; ++i) {
      const auto& h = hood[i];
      const Candidate child = s.offspring(pop[h[s.index(h.size())]], pop[h[s.index(h.size())]]);
      std::size_t replaced = 0;
      for (std::size_t j : h) {
        if (replaced >= config.replacement_limit) break;
        if (weighted(child.fitness, w[j]) < weighted(pop[j].fitness, w[j])) {
          pop[j] = child;
          ++replaced;
        }
      }
    }
  }
  return s.result();
}

BaselineResult mogls_solve(const vrptw::Instance& instance, const MoeaConfig& config) {
  Search s(instance, config);
  const std::size_t p = config.population;
  std::vector<Candidate> pop;
  for (std::size_t i = 0; i < p; ++i) pop.push_back(s.improve(s.random()));
  const std::size_t k = std::min(config.elite_size, p);

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double u = s.unit();
    const std::array<double, 2> w{u, 1.0 - u};
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return weighted(pop[a].fitness, w) < weighted(pop[b].fitness, w);
    });
    order.resize(k);
    const std::size_t a = order[s.index(k)];
    std::size_t b = order[s.index(k)];
    if (k > 1)
      while (b == a) b = order[s.index(k)];
    const Candidate child = s.improve(s.offspring(pop[a], pop[b], true));
    const std::size_t worst = order.back();
    const bool duplicate = std::any_of(pop.begin(), pop.end(), [&](const Candidate& c) { return c.fitness == child.fitness; });
    if (!duplicate && weighted(child.fitness, w) < weighted(pop[worst].fitness, w)) pop[worst] = child;
  }
  return s.result();
}

BaselineResult solve(Algorithm a, const vrptw::Instance& instance, const MoeaConfig& config) {
  switch (a) {
    case Algorithm::Nsga2: return nsga2_solve(instance, config);
    case Algorithm::Moead: return moead_solve(instance, config);
    case Algorithm::Mogls: return mogls_solve(instance, config);
  }
  throw ConfigError("unknown algorithm");
}

BaselineResult enumerate_pareto_oracle(const vrptw::Instance& instance) {
  const std::size_t n = instance.customer_count();
  if (n > kOracleMaxCustomers)
    throw ConfigError("enumerate_pareto_oracle: " + std::to_string(n) + " customers exceeds the limit of " +
                      std::to_string(kOracleMaxCustomers));
  Archive archive;
  std::size_t evaluations = 0;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  const std::size_t cuts = n == 0 ? 1 : std::size_t{1} << (n - 1);
  do {
    for (std::size_t mask = 0; mask < cuts; ++mask) {
      Candidate c;
      vrptw::Route r;
      bool ok = true;
      for (std::size_t k = 0; k < n && ok; ++k) {
        r.push_back(perm[k]);
        if (k + 1 == n || (mask >> k) & 1) {
          ok = route_feasible(instance, r);
          c.solution.routes.push_back(std::move(r));
          r.clear();
        }
      }
      if (!ok) continue;
      const auto f = vrptw::evaluate_solution(instance, c.solution);
      c.fitness = {f.f1, f.f2};
      ++evaluations;
      archive.offer(c);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  BaselineResult res = archive.result(evaluations);
  if (res.solutions.empty()) res.diagnostic = "no feasible solution: some customer cannot be served by any route";
  return res;
}

}  // namespace movrp::baselines
