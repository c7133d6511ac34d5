#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "movrp/baselines/baselines.hpp"
#include "movrp/common/error.hpp"
#include "movrp/vrptw/generator.hpp"
#include "movrp/vrptw/state.hpp"

using namespace movrp;
using namespace movrp::baselines;

namespace {

vrptw::Node customer(double x, double y, double open = 0.0, double close = 9.0, double demand = 0.1) {
  vrptw::Node n;
  n.coords = {x, y};
  n.tw_open = open;
  n.tw_close = close;
  n.demand = demand;
  n.service = 0.0;
  return n;
}

vrptw::Instance make(std::vector<vrptw::Node> customers) {
  vrptw::Instance inst;
  vrptw::Node depot;
  depot.coords = {0.0, 0.0};
  depot.tw_close = 10.0;
  inst.nodes.push_back(depot);
  for (auto& c : customers) inst.nodes.push_back(c);
  inst.capacity = 750;
  return inst;
}

// Generated instance with every window opened to the latest feasible close.
vrptw::Instance loose(std::size_t n, std::uint64_t seed) {
  auto inst = vrptw::generate_instance(n, seed, vrptw::SizeClass::N50);
  for (std::size_t i = 1; i < inst.node_count(); ++i) {
    inst.nodes[i].tw_open = 0.0;
    inst.nodes[i].tw_close = inst.horizon() - inst.distance(i, 0) - inst.nodes[i].service;
  }
  return inst;
}

std::vector<std::pair<double, double>> distinct_points(const pareto::ParetoFront& f) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : f.entries()) pts.emplace_back(e.f1, e.f2);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](auto a, auto b) { return std::abs(a.first - b.first) < 1e-9 && std::abs(a.second - b.second) < 1e-9; }),
            pts.end());
  return pts;
}

bool same_front(const pareto::ParetoFront& a, const pareto::ParetoFront& b) {
  const auto x = distinct_points(a), y = distinct_points(b);
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i].first - y[i].first) > 1e-9 || std::abs(x[i].second - y[i].second) > 1e-9) return false;
  return true;
}

void check_result(const vrptw::Instance& inst, const BaselineResult& r) {
  for (const auto& e : r.front.entries()) {
    const auto& sol = r.solutions.at(e.payload);
    CHECK(vrptw::validate_solution(inst, sol).ok());
    const auto f = vrptw::evaluate_solution(inst, sol);
    CHECK(f.f1 == e.f1);
    CHECK(f.f2 == e.f2);
  }
  const auto pts = r.front.points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) CHECK_FALSE(pareto::dominates(pts[i], pts[j]));
}

}  // namespace

TEST_CASE("giant tour encoding") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    const auto inst = vrptw::generate_instance(n, 1000 + trial, vrptw::SizeClass::N50);
    const auto tour = random_giant_tour(n, rng);
    CHECK_NOTHROW(check_giant_tour(tour, n));
    const auto sol = decode(inst, tour);
    REQUIRE(vrptw::validate_solution(inst, sol).ok());
    const auto again = decode(inst, encode(inst, sol));
    CHECK(again.routes == sol.routes);

    auto child = order_crossover(tour.tokens, random_giant_tour(n, rng).tokens, rng);
    CHECK_NOTHROW(check_giant_tour(GiantTour{child}, n));
    mutate(child, rng);
    CHECK_NOTHROW(check_giant_tour(GiantTour{child}, n));
  }
  const auto inst = make({customer(0.6, 0.0), customer(0.0, 0.8)});
  CHECK(decode(inst, GiantTour{{1, 3, 2}}).routes == std::vector<vrptw::Route>{{1}, {2}});
  CHECK(decode(inst, GiantTour{{3, 2, 1}}).routes == std::vector<vrptw::Route>{{2, 1}});
  CHECK_THROWS_AS(check_giant_tour(GiantTour{{1, 1, 2}}, 2), Error);

  auto bad = make({customer(0.6, 0.0, 0.0, 0.1)});
  CHECK_THROWS_AS(decode(bad, GiantTour{{1}}), DataError);
}

TEST_CASE("order crossover keeps the slice of the first parent") {
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> a{1, 2, 3, 4, 5, 6, 7}, b{7, 6, 5, 4, 3, 2, 1};
  for (int t = 0; t < 50; ++t) {
    const auto c = order_crossover(a, b, rng);
    std::vector<std::size_t> from_a;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] == a[i]) from_a.push_back(i);
    CHECK_FALSE(from_a.empty());
    auto sorted = c;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == a);
  }
}

TEST_CASE("two_opt") {
  const auto square = make({customer(1, 1), customer(1, 0), customer(0, 1)});
  const vrptw::Route crossed{1, 2, 3};
  CHECK(vrptw::route_distance(square, crossed) == doctest::Approx(2 + 2 * std::sqrt(2.0)));
  const auto fixed = two_opt(crossed, square);
  CHECK(vrptw::route_distance(square, fixed) == doctest::Approx(4.0).epsilon(1e-12));

  const auto pair = make({customer(0.6, 0.0), customer(0.0, 0.8)});
  CHECK(two_opt({1, 2}, pair) == vrptw::Route{1, 2});

  // (1,1) must be reached by 1.5; every shorter order arrives there later.
  const auto guarded = make({customer(1, 1, 0.0, 1.5), customer(1, 0), customer(0, 1)});
  REQUIRE(route_feasible(guarded, crossed));
  CHECK(two_opt(crossed, guarded) == crossed);

  std::mt19937_64 rng(8);
  std::size_t tested = 0;
  for (int trial = 0; tested < 2000; ++trial) {
    const auto inst = loose(12, 5000 + trial);
    std::vector<std::size_t> ids(inst.customer_count());
    std::iota(ids.begin(), ids.end(), std::size_t{1});
    std::shuffle(ids.begin(), ids.end(), rng);
    vrptw::Route r(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(2 + rng() % 6));
    if (!route_feasible(inst, r)) continue;
    ++tested;
    const auto out = two_opt(r, inst);
    CHECK(route_feasible(inst, out));
    CHECK(vrptw::route_distance(inst, out) <= vrptw::route_distance(inst, r));
    auto a = r, b = out;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("enumeration oracle") {
  const auto one = make({customer(0.3, 0.4)});
  const auto r1 = enumerate_pareto_oracle(one);
  REQUIRE(r1.front.size() == 1);
  CHECK(r1.front.entries()[0].f1 == doctest::Approx(1.0));
  CHECK(r1.front.entries()[0].f2 == doctest::Approx(1.0));

  const auto two = make({customer(0.6, 0.0), customer(0.0, 0.8)});
  const auto r2 = enumerate_pareto_oracle(two);
  const auto pts = distinct_points(r2.front);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].first == doctest::Approx(2.4));
  CHECK(pts[0].second == doctest::Approx(2.4));
  CHECK(pts[1].first == doctest::Approx(2.8));
  CHECK(pts[1].second == doctest::Approx(1.6));
  check_result(two, r2);

  const auto none = make({customer(0.6, 0.0, 0.0, 0.1)});
  const auto r3 = enumerate_pareto_oracle(none);
  CHECK(r3.front.empty());
  CHECK_FALSE(r3.diagnostic.empty());

  CHECK_THROWS_AS(enumerate_pareto_oracle(vrptw::generate_instance(9, 1, vrptw::SizeClass::N50)), ConfigError);
}

TEST_CASE("solvers against the enumeration oracle") {
  const auto inst = vrptw::generate_instance(5, 77, vrptw::SizeClass::N50);
  const auto oracle = enumerate_pareto_oracle(inst);
  REQUIRE_FALSE(oracle.front.empty());
  for (Algorithm a : {Algorithm::Nsga2, Algorithm::Moead, Algorithm::Mogls}) {
    const std::string name = to_string(a);
    CAPTURE(name);
    auto cfg = desk_moea_config(a);
    cfg.iterations = a == Algorithm::Mogls ? 2000 : 500;  // generous budgets
    cfg.seed = 4;
    const auto r = solve(a, inst, cfg);
    check_result(inst, r);
    if (!same_front(r.front, oracle.front)) {
      for (auto [x, y] : distinct_points(r.front)) MESSAGE("solver ", x, " ", y);
      for (auto [x, y] : distinct_points(oracle.front)) MESSAGE("oracle ", x, " ", y);
    }
    CHECK(same_front(r.front, oracle.front));
    // Never better than the oracle.
    for (const auto& p : r.front.points()) {
      bool covered = false;
      for (const auto& q : oracle.front.points()) covered = covered || (q[0] <= p[0] + 1e-9 && q[1] <= p[1] + 1e-9);
      CHECK(covered);
    }
    const auto again = solve(a, inst, cfg);
    CHECK(again.solutions.size() == r.solutions.size());
    for (std::size_t i = 0; i < r.solutions.size(); ++i) CHECK(again.solutions[i].routes == r.solutions[i].routes);
  }
}

TEST_CASE("solver edge cases") {
  const auto one = make({customer(0.3, 0.4)});
  for (Algorithm a : {Algorithm::Nsga2, Algorithm::Moead, Algorithm::Mogls}) {
    auto cfg = desk_moea_config(a);
    cfg.population = 10;
    cfg.iterations = 5;
    const auto r = solve(a, one, cfg);
    REQUIRE(r.front.size() == 1);
    CHECK(r.front.entries()[0].f1 == doctest::Approx(1.0));
    CHECK(r.front.entries()[0].f2 == doctest::Approx(1.0));
  }

  const auto inst = vrptw::generate_instance(6, 12, vrptw::SizeClass::N50);
  const auto oracle = enumerate_pareto_oracle(inst);
  MoeaConfig single = desk_moea_config(Algorithm::Moead);
  single.population = 1;
  single.mutation_rate = 1.0;
  single.iterations = 3000;
  const auto r = moead_solve(inst, single);
  CHECK(r.front.entries().front().f1 == doctest::Approx(oracle.front.entries().front().f1).epsilon(1e-12));

  MoeaConfig zero = desk_moea_config(Algorithm::Mogls);
  zero.population = 8;
  zero.iterations = 0;
  const auto z = mogls_solve(inst, zero);
  CHECK(z.evaluations == 16);
  CHECK_FALSE(z.front.empty());
  check_result(inst, z);

  MoeaConfig bad;
  bad.population = 0;
  CHECK_THROWS_AS(nsga2_solve(inst, bad), ConfigError);
  CHECK_THROWS_AS(algorithm_from_string("tabu"), ConfigError);
  CHECK(algorithm_from_string("mogls") == Algorithm::Mogls);
}
