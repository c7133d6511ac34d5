#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "movrp/common/error.hpp"
#include "movrp/pareto/pareto.hpp"
#include "oracles/pareto_oracles.hpp"

using namespace movrp;
using namespace movrp::pareto;

namespace {

std::vector<Fitness> random_points(std::mt19937_64& rng, std::size_t n, bool integer_grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> g(0, 6);
  std::vector<Fitness> pts(n);
  for (Fitness& p : pts) p = integer_grid ? Fitness{double(g(rng)), double(g(rng))} : Fitness{u(rng), u(rng)};
  return pts;
}

// Mutually non-dominated points on a random convex-ish curve.
std::vector<Fitness> random_front(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Fitness> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    pts.push_back({x, (1.0 - x) * (1.0 - x) + 0.05 * u(rng)});
  }
  return pts;
}

}  // namespace

TEST_CASE("dominance examples and order properties") {
  CHECK(dominates(Fitness{1, 2}, Fitness{2, 2}));
  CHECK_FALSE(dominates(Fitness{1, 2}, Fitness{2, 1}));
  CHECK_FALSE(dominates(Fitness{2, 1}, Fitness{1, 2}));
  CHECK_FALSE(dominates(Fitness{1, 2}, Fitness{1, 2}));
  CHECK_THROWS_AS(dominates(Fitness{1, 2}, Fitness{1, 2, 3}), Error);

  std::mt19937_64 rng(3);
  const auto pts = random_points(rng, 40, true);
  for (const auto& a : pts) {
    CHECK_FALSE(dominates(a, a));
    for (const auto& b : pts) {
      if (dominates(a, b)) CHECK_FALSE(dominates(b, a));
      for (const auto& c : pts)
        if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));
    }
  }
}

TEST_CASE("non-dominated sorting") {
  const auto fronts = non_dominated_sort({{1, 1}, {2, 2}, {0, 3}});
  REQUIRE(fronts.size() == 2);
  CHECK(fronts[0] == std::vector<std::size_t>{0, 2});
  CHECK(fronts[1] == std::vector<std::size_t>{1});
  CHECK(non_dominated_sort({{1, 1}, {1, 1}, {1, 1}}).size() == 1);
  CHECK(non_dominated_sort({}).empty());

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial * 2;
    const auto pts = random_points(rng, n, trial % 2 == 0);
    const auto got = non_dominated_sort(pts);
    CHECK(got.front() == oracle::maximal_set(pts));
    // Peeling the brute-force maximal set reproduces every front.
    std::vector<std::size_t> alive(n);
    for (std::size_t i = 0; i < n; ++i) alive[i] = i;
    std::size_t total = 0;
    for (const auto& front : got) {
      std::vector<oracle::Point> sub;
      for (std::size_t i : alive) sub.push_back(pts[i]);
      std::vector<std::size_t> expect;
      for (std::size_t k : oracle::maximal_set(sub)) expect.push_back(alive[k]);
      CHECK(front == expect);
      std::vector<std::size_t> rest;
      std::set_difference(alive.begin(), alive.end(), front.begin(), front.end(), std::back_inserter(rest));
      alive = rest;
      total += front.size();
    }
    CHECK(total == n);
  }
}

TEST_CASE("crowding distance") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Fitness> pts{{0, 3}, {1, 1}, {3, 0}};
  const auto cd = crowding_distance(pts, {0, 1, 2});
  CHECK(cd[0] == inf);
  CHECK(cd[2] == inf);
  CHECK(cd[1] == doctest::Approx(2.0));
  CHECK(crowding_distance(pts, {0, 2}) == std::vector<double>{inf, inf});
  CHECK(crowding_distance(pts, {1}) == std::vector<double>{inf});
  const auto same = crowding_distance({{1, 1}, {1, 1}, {1, 1}}, {0, 1, 2});
  CHECK(same == std::vector<double>{0, 0, 0});
}

TEST_CASE("hypervolume hand values") {
  CHECK(hypervolume_2d({{1, 1}}, {2, 2}).value == 1.0);
  CHECK(hypervolume_2d({{0, 3}, {1, 1}, {3, 0}}, {4, 4}).value == 11.0);
  CHECK(hypervolume_2d({}, {4, 4}).value == 0.0);
  const Hypervolume clipped = hypervolume_2d({{1, 1}, {5, 0}, {0, 6}}, {4, 4});
  CHECK(clipped.value == 9.0);
  CHECK(clipped.clipped == 2);
  CHECK_THROWS_AS(hypervolume_2d({{1, 1, 1}}, {4, 4}), Error);
  CHECK_THROWS_AS(hypervolume_2d({{1, NAN}}, {4, 4}), Error);
}

TEST_CASE("hypervolume agrees with grid and Monte Carlo oracles") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_front(rng, size(rng));
    const Fitness ref{1.1, 1.2};
    const double exact = hypervolume_2d(pts, ref).value;
    CHECK(std::abs(exact - oracle::grid_hypervolume(pts, ref, 2e-3)) < 1e-2);
    const auto mc = oracle::mc_hypervolume(pts, ref, 20000, 100 + trial);
    CHECK(std::abs(exact - mc.value) <= 3.0 * mc.std_error + 1e-12);
  }
}

TEST_CASE("hypervolume is monotone") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_points(rng, 10, trial % 3 == 0);
    const Fitness ref{7, 7};
    const double before = hypervolume_2d(pts, ref).value;
    const Fitness extra{u(rng) * 7, u(rng) * 7};
    pts.push_back(extra);
    CHECK(hypervolume_2d(pts, ref).value >= before);
    // A point dominated by an existing one adds nothing.
    Fitness worse = pts[0];
    worse[0] += 0.5;
    const double with_extra = hypervolume_2d(pts, ref).value;
    pts.push_back(worse);
    CHECK(hypervolume_2d(pts, ref).value == with_extra);
  }
}

TEST_CASE("pareto front container") {
  const std::vector<Fitness> pts{{3, 0}, {1, 1}, {2, 2}, {0, 3}, {1, 1}};
  const ParetoFront front(pts, {10, 11, 12, 13, 14});
  REQUIRE(front.size() == 4);
  CHECK(front.entries()[0].payload == 13);
  CHECK(front.entries()[1].payload == 11);
  CHECK(front.entries()[2].payload == 14);
  CHECK(front.entries()[3].payload == 10);
  CHECK(front.distinct_count() == 3);
  CHECK(distinct_non_dominated(pts) == 3);
  CHECK(front.hypervolume({4, 4}).value == 11.0);
  for (std::size_t i = 1; i < front.size(); ++i) {
    const auto& a = front.entries()[i - 1];
    const auto& b = front.entries()[i];
    CHECK(a.f1 <= b.f1);
    if (a.f1 != b.f1 || a.f2 != b.f2) CHECK(b.f2 < a.f2);
  }
  CHECK(ParetoFront().empty());
  CHECK_THROWS_AS(ParetoFront(pts, {1, 2}), Error);
}
