#include "wde/grid.hpp"

#include <cmath>

#include "wde/error.hpp"

namespace wde {

QuadratureGrid::QuadratureGrid(std::vector<double> lo_, std::vector<double> hi_, std::vector<int> cells_)
    : lo(std::move(lo_)), hi(std::move(hi_)), cells(std::move(cells_)) {
  if (lo.size() != hi.size() || lo.size() != cells.size() || lo.empty()) {
    throw Error(ErrorCode::InvalidArgument, "grid bounds and cell counts disagree");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i]) || cells[i] < 1) {
      throw Error(ErrorCode::InvalidArgument, "grid needs hi > lo and at least one cell per axis");
    }
  }
}

QuadratureGrid QuadratureGrid::aligned(const Box& box, int cells_per_unit) {
  if (cells_per_unit < 1) throw Error(ErrorCode::InvalidArgument, "cells per unit must be positive");
  std::vector<double> lo, hi;
  std::vector<int> cells;
  const double h = 1.0 / cells_per_unit;
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    const double a = std::floor(box.lo[i] * cells_per_unit) * h;
    double b = std::ceil(box.hi[i] * cells_per_unit) * h;
    if (!(b > a)) b = a + h;
    lo.push_back(a);
    hi.push_back(b);
    cells.push_back(static_cast<int>(std::llround((b - a) * cells_per_unit)));
  }
  return QuadratureGrid(std::move(lo), std::move(hi), std::move(cells));
}

double QuadratureGrid::step(int axis) const {
  const auto a = static_cast<std::size_t>(axis);
  return (hi[a] - lo[a]) / cells[a];
}

std::vector<double> QuadratureGrid::nodes(int axis) const {
  std::vector<double> out(static_cast<std::size_t>(cells[static_cast<std::size_t>(axis)]));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(axis, static_cast<int>(i));
  return out;
}

double QuadratureGrid::weight() const {
  double w = 1.0;
  for (int i = 0; i < dim(); ++i) w *= step(i);
  return w;
}

double QuadratureGrid::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

std::size_t QuadratureGrid::size() const {
  std::size_t n = 1;
  for (int c : cells) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<double> QuadratureGrid::point(std::size_t flat) const {
  std::vector<double> x(lo.size());
  for (int axis = dim() - 1; axis >= 0; --axis) {
    const auto a = static_cast<std::size_t>(axis);
    const auto c = static_cast<std::size_t>(cells[a]);
    x[a] = node(axis, static_cast<int>(flat % c));
    flat /= c;
  }
  return x;
}

Box box_union(const Box& a, const Box& b) {
  if (a.lo.empty()) return b;
  if (b.lo.empty()) return a;
  Box out = a;
  for (std::size_t i = 0; i < out.lo.size(); ++i) {
    out.lo[i] = std::min(out.lo[i], b.lo[i]);
    out.hi[i] = std::max(out.hi[i], b.hi[i]);
  }
  return out;
}

}  // namespace wde
