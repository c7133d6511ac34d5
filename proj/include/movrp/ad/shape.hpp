#pragma once

#include <cstddef>
#include <string>

namespace movrp::ad {

// The engine is matrix-only: every tensor is rows x cols, row-major. Vectors
// are 1 x n, scalars 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

}  // namespace movrp::ad
