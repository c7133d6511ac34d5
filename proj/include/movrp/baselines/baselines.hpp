#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "movrp/pareto/pareto.hpp"
#include "movrp/vrptw/instance.hpp"
#include "movrp/vrptw/solution.hpp"

namespace movrp::baselines {

// Customers are tokens 1..N; tokens N+1..2N-1 are route separators. Decoding
// walks the tokens, closing the current route at a separator or whenever the
// next customer no longer fits (capacity, window, depot deadline). The
// separators let every partition into routes be expressed.
struct GiantTour {
  std::vector<std::size_t> tokens;
};

std::size_t token_count(std::size_t customers);
GiantTour random_giant_tour(std::size_t customers, std::mt19937_64& rng);
// Throws Error unless `tour` is a permutation of the tokens for `customers`.
void check_giant_tour(const GiantTour& tour, std::size_t customers);
// Throws DataError if some customer cannot be served even by a fresh vehicle.
vrptw::Solution decode(const vrptw::Instance& instance, const GiantTour& tour);
// Routes joined by separators, remaining separators appended.
GiantTour encode(const vrptw::Instance& instance, const vrptw::Solution& solution);

// Order crossover: a random slice of `a`, the rest in the order of `b`.
std::vector<std::size_t> order_crossover(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                         std::mt19937_64& rng);
// Swap of two positions or re-insertion of one token, with equal chance.
void mutate(std::vector<std::size_t>& tokens, std::mt19937_64& rng);

// Whether a single vehicle can run `route` from the depot and back in time.
bool route_feasible(const vrptw::Instance& instance, const vrptw::Route& route);

// Best-improvement 2-opt: applies the feasible segment reversal that shortens
// the route most, until none does or `max_iterations` reversals are made.
// The input must be feasible; the distance never increases.
vrptw::Route two_opt(const vrptw::Route& route, const vrptw::Instance& instance, std::size_t max_iterations = 100);

enum class Algorithm { Nsga2, Moead, Mogls };
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct MoeaConfig {
  std::size_t population = 100;
  std::size_t iterations = 500;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::size_t neighborhood = 10;     // MOEA/D
  std::size_t replacement_limit = 2;  // MOEA/D
  std::size_t elite_size = 20;       // MOGLS temporary population
  std::size_t local_search_iterations = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

// Iteration budgets: NSGA-II and MOEA/D 500 at desk scale and 20000 at full
// scale; MOGLS 100 and 4000.
MoeaConfig desk_moea_config(Algorithm a);
MoeaConfig full_moea_config(Algorithm a);

struct BaselineResult {
  // Payloads index `solutions`.
  pareto::ParetoFront front;
  std::vector<vrptw::Solution> solutions;
  std::size_t evaluations = 0;
  std::string diagnostic;
};

// Iterations are generations of `population` offspring. Returns the external
// archive of every non-dominated solution seen.
BaselineResult nsga2_solve(const vrptw::Instance& instance, const MoeaConfig& config);
// Weighted-sum subproblems (1 - i/(P-1), i/(P-1)); a population of one uses
// (1, 0). One iteration gives every subproblem one offspring.
BaselineResult moead_solve(const vrptw::Instance& instance, const MoeaConfig& config);
// One iteration: random weight, elite by that weight, crossover, mutation,
// 2-opt on every route, replacement of the elite's worst member if better.
BaselineResult mogls_solve(const vrptw::Instance& instance, const MoeaConfig& config);
BaselineResult solve(Algorithm a, const vrptw::Instance& instance, const MoeaConfig& config);

inline constexpr std::size_t kOracleMaxCustomers = 8;
// Every ordered partition of the customers into routes, feasibility-filtered.
// Throws ConfigError above kOracleMaxCustomers. An instance without feasible
// solutions gives an empty front and a diagnostic.
BaselineResult enumerate_pareto_oracle(const vrptw::Instance& instance);

}  // namespace movrp::baselines
