#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace movrp::pareto {

// Objective vector, all coordinates minimized.
using Fitness = std::vector<double>;

// x <= y everywhere and x < y somewhere. Throws Error on a dimension mismatch.
bool dominates(std::span<const double> x, std::span<const double> y);

// Fronts of point indices, best first; indices ascending within a front.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Fitness>& points);

// Crowding distance of each member of `front` (indices into `points`), in the
// order of `front`. Per objective the members are ordered by (value, index);
// the first and last get +inf, the rest accumulate (next - prev) / range.
// Objectives with zero range add nothing. Fronts of at most two points are
// all +inf.
std::vector<double> crowding_distance(const std::vector<Fitness>& points, const std::vector<std::size_t>& front);

// Front rank (0 = best) and crowding distance within that front, per point.
struct RankCrowding {
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
};
RankCrowding rank_and_crowding(const std::vector<Fitness>& points);

// NSGA-II survivor selection: whole fronts while they fit, then the boundary
// front by descending crowding distance, ties by ascending tag. Returns the
// kept indices in ascending order.
std::vector<std::size_t> nsga2_select(const std::vector<Fitness>& points, std::span<const std::size_t> tags,
                                      std::size_t keep);

struct Hypervolume {
  double value = 0.0;
  // Points beyond the reference in some coordinate, left out of the area.
  std::size_t clipped = 0;
};

// Exact area dominated by `points` and bounded by `reference`. Throws Error
// unless every point and the reference are 2-D and finite.
Hypervolume hypervolume_2d(const std::vector<Fitness>& points, const Fitness& reference);

// Number of distinct fitness values among the non-dominated points.
std::size_t distinct_non_dominated(const std::vector<Fitness>& points);

struct FrontEntry {
  double f1 = 0.0;
  double f2 = 0.0;
  std::size_t payload = 0;
};

// Non-dominated subset of a 2-D point set, sorted by (f1, payload). Equal
// fitness values stay as separate entries; between distinct values f2 is
// strictly decreasing.
class ParetoFront {
 public:
  ParetoFront() = default;
  // payloads[i] tags points[i]; an empty payload list means 0, 1, 2, ...
  ParetoFront(const std::vector<Fitness>& points, const std::vector<std::size_t>& payloads = {});

  const std::vector<FrontEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t distinct_count() const;
  std::vector<Fitness> points() const;
  Hypervolume hypervolume(const Fitness& reference) const;

 private:
  std::vector<FrontEntry> entries_;
};

}  // namespace movrp::pareto
