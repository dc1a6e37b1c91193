#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "lsam/error.hpp"

namespace lsam {

// Dense tensor extents, rank 1..3. Rank 3 is laid out batch x rows x cols,
// row-major, and is all the architecture needs (batch x features x embed).
struct Shape {
  int rank = 0;
  std::array<std::int64_t, 3> d{1, 1, 1};

  static Shape vec(std::int64_t n) { return Shape{1, {n, 1, 1}}; }
  static Shape mat(std::int64_t r, std::int64_t c) { return Shape{2, {r, c, 1}}; }
  static Shape cube(std::int64_t b, std::int64_t r, std::int64_t c) {
    return Shape{3, {b, r, c}};
  }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= d[i];
    return n;
  }

  // Extent of the last axis; every reduction/normalization in the engine
  // works over this axis.
  std::int64_t last() const { return rank == 0 ? 0 : d[rank - 1]; }

  // Number of positions when the tensor is viewed as (lead x last).
  std::int64_t lead() const { return last() == 0 ? 0 : numel() / last(); }

  bool operator==(const Shape&) const = default;

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < rank; ++i) {
      if (i) s += "x";
      s += std::to_string(d[i]);
    }
    return s + "]";
  }
};

inline void require_shape(bool ok, const std::string& op, const Shape& a, const Shape& b) {
  if (!ok) throw ShapeError(op + ": incompatible shapes " + a.str() + " and " + b.str());
}

}  // namespace lsam
