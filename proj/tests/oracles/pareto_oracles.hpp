#pragma once

// Independent reference implementations used only by tests.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline bool weakly_better_everywhere(const Point& a, const Point& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

inline bool dominates(const Point& a, const Point& b) { return weakly_better_everywhere(a, b) && a != b; }

// Indices of points no other point dominates, O(n^2).
inline std::vector<std::size_t> maximal_set(const std::vector<Point>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool beaten = false;
    for (std::size_t j = 0; j < pts.size() && !beaten; ++j) beaten = j != i && dominates(pts[j], pts[i]);
    if (!beaten) out.push_back(i);
  }
  return out;
}

// Counts grid cells (by centre) dominated by some point, between the lowest
// point coordinates and the reference.
inline double grid_hypervolume(const std::vector<Point>& pts, const Point& ref, double h) {
  if (pts.empty()) return 0.0;
  double lo0 = ref[0], lo1 = ref[1];
  for (const Point& p : pts) {
    lo0 = std::min(lo0, p[0]);
    lo1 = std::min(lo1, p[1]);
  }
  const long nx = static_cast<long>(std::ceil((ref[0] - lo0) / h));
  const long ny = static_cast<long>(std::ceil((ref[1] - lo1) / h));
  long covered = 0;
  for (long ix = 0; ix < nx; ++ix) {
    const double cx = lo0 + (ix + 0.5) * h;
    if (cx > ref[0]) continue;
    for (long iy = 0; iy < ny; ++iy) {
      const double cy = lo1 + (iy + 0.5) * h;
      if (cy > ref[1]) continue;
      for (const Point& p : pts)
        if (p[0] <= cx && p[1] <= cy) {
          ++covered;
          break;
        }
    }
  }
  return static_cast<double>(covered) * h * h;
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Uniform sampling in the box [lo, ref].
inline McEstimate mc_hypervolume(const std::vector<Point>& pts, const Point& ref, std::size_t samples,
                                 std::uint64_t seed) {
  if (pts.empty()) return {};
  double lo0 = ref[0], lo1 = ref[1];
  for (const Point& p : pts) {
    lo0 = std::min(lo0, p[0]);
    lo1 = std::min(lo1, p[1]);
  }
  const double box = (ref[0] - lo0) * (ref[1] - lo1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo0, ref[0]), uy(lo1, ref[1]);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = ux(rng), y = uy(rng);
    for (const Point& p : pts)
      if (p[0] <= x && p[1] <= y) {
        ++hits;
        break;
      }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {frac * box, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

}  // namespace oracle
