#include "movrp/pareto/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "movrp/common/error.hpp"

namespace movrp::pareto {

bool dominates(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("dominates: dimension mismatch " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  bool strict = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > y[i]) return false;
    if (x[i] < y[i]) strict = true;
  }
  return strict;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Fitness>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated_by_me[i].push_back(j);
        ++count[j];
      } else if (dominates(points[j], points[i])) {
        dominated_by_me[j].push_back(i);
        ++count[i];
      }
    }

  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated_by_me[i])
        if (--count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Fitness>& points, const std::vector<std::size_t>& front) {
  const std::size_t n = front.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cd(n, 0.0);
  if (n <= 2) return std::vector<double>(n, inf);

  const std::size_t m = points[front[0]].size();
  std::vector<std::size_t> order(n);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = points[front[a]][obj], vb = points[front[b]][obj];
      return va != vb ? va < vb : front[a] < front[b];
    });
    const double lo = points[front[order.front()]][obj];
    const double hi = points[front[order.back()]][obj];
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    cd[order.front()] = inf;
    cd[order.back()] = inf;
    for (std::size_t k = 1; k + 1 < n; ++k)
      cd[order[k]] += (points[front[order[k + 1]]][obj] - points[front[order[k - 1]]][obj]) / range;
  }
  return cd;
}

Hypervolume hypervolume_2d(const std::vector<Fitness>& points, const Fitness& reference) {
  if (reference.size() != 2 || !std::isfinite(reference[0]) || !std::isfinite(reference[1]))
    throw Error("hypervolume_2d: reference must be a finite 2-D point");
  Hypervolume hv;
  std::vector<std::pair<double, double>> kept;
  for (const Fitness& p : points) {
    if (p.size() != 2 || !std::isfinite(p[0]) || !std::isfinite(p[1]))
      throw Error("hypervolume_2d: points must be finite and 2-D");
    if (p[0] > reference[0] || p[1] > reference[1]) {
      ++hv.clipped;
      continue;
    }
    kept.emplace_back(p[0], p[1]);
  }
  std::sort(kept.begin(), kept.end());
  double ceiling = reference[1];
  for (const auto& [f1, f2] : kept) {
    if (f2 >= ceiling) continue;
    hv.value += (reference[0] - f1) * (ceiling - f2);
    ceiling = f2;
  }
  return hv;
}

std::size_t distinct_non_dominated(const std::vector<Fitness>& points) {
  if (points.empty()) return 0;
  const auto fronts = non_dominated_sort(points);
  std::vector<Fitness> first;
  for (std::size_t i : fronts.front()) first.push_back(points[i]);
  std::sort(first.begin(), first.end());
  return static_cast<std::size_t>(std::unique(first.begin(), first.end()) - first.begin());
}

ParetoFront::ParetoFront(const std::vector<Fitness>& points, const std::vector<std::size_t>& payloads) {
  if (!payloads.empty() && payloads.size() != points.size())
    throw Error("ParetoFront: payload count does not match point count");
  for (const Fitness& p : points)
    if (p.size() != 2) throw Error("ParetoFront: points must be 2-D");
  if (points.empty()) return;
  const auto fronts = non_dominated_sort(points);
  for (std::size_t i : fronts.front())
    entries_.push_back({points[i][0], points[i][1], payloads.empty() ? i : payloads[i]});
  std::sort(entries_.begin(), entries_.end(), [](const FrontEntry& a, const FrontEntry& b) {
    if (a.f1 != b.f1) return a.f1 < b.f1;
    return a.payload < b.payload;
  });
}

std::size_t ParetoFront::distinct_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (i == 0 || entries_[i].f1 != entries_[i - 1].f1 || entries_[i].f2 != entries_[i - 1].f2) ++count;
  return count;
}

std::vector<Fitness> ParetoFront::points() const {
  std::vector<Fitness> out;
  out.reserve(entries_.size());
  for (const FrontEntry& e : entries_) out.push_back({e.f1, e.f2});
  return out;
}

Hypervolume ParetoFront::hypervolume(const Fitness& reference) const { return hypervolume_2d(points(), reference); }

RankCrowding rank_and_crowding(const std::vector<Fitness>& points) {
  RankCrowding rc;
  rc.rank.assign(points.size(), 0);
  rc.crowding.assign(points.size(), 0.0);
  const auto fronts = non_dominated_sort(points);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto cd = crowding_distance(points, fronts[r]);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      rc.rank[fronts[r][k]] = r;
      rc.crowding[fronts[r][k]] = cd[k];
    }
  }
  return rc;
}

std::vector<std::size_t> nsga2_select(const std::vector<Fitness>& points, std::span<const std::size_t> tags,
                                      std::size_t keep) {
  if (tags.size() != points.size()) throw Error("nsga2_select: one tag per point required");
  std::vector<std::size_t> kept;
  if (keep >= points.size()) {
    kept.resize(points.size());
    std::iota(kept.begin(), kept.end(), 0);
    return kept;
  }
  const auto fronts = non_dominated_sort(points);
  for (const auto& front : fronts) {
    if (kept.size() + front.size() <= keep) {
      kept.insert(kept.end(), front.begin(), front.end());
      if (kept.size() == keep) break;
      continue;
    }
    const auto cd = crowding_distance(points, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cd[a] != cd[b]) return cd[a] > cd[b];
      return tags[front[a]] < tags[front[b]];
    });
    for (std::size_t r = 0; kept.size() < keep; ++r) kept.push_back(front[order[r]]);
    break;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace movrp::pareto
