#pragma once

#include <cstddef>
#include <vector>

#include "wde/wavelet.hpp"

namespace wde {

/// Midpoint rule on an axis-aligned box: cells[i] equal cells per axis,
/// nodes at cell centres, every node weighted by the cell volume.
struct QuadratureGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> cells;

  QuadratureGrid() = default;
  QuadratureGrid(std::vector<double> lo_, std::vector<double> hi_, std::vector<int> cells_);

  /// Box [lo, hi] snapped outward to multiples of 1/cells_per_unit.
  static QuadratureGrid aligned(const Box& box, int cells_per_unit);

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  double step(int axis) const;
  double node(int axis, int i) const { return lo[static_cast<std::size_t>(axis)] + (i + 0.5) * step(axis); }
  std::vector<double> nodes(int axis) const;
  double weight() const;
  double volume() const;
  std::size_t size() const;

  /// Coordinates of the flat node index (row-major, last axis fastest).
  std::vector<double> point(std::size_t flat) const;
};

/// Smallest box containing both.
Box box_union(const Box& a, const Box& b);

}  // namespace wde
