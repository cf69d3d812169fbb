#include "wde/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wde/error.hpp"

namespace wde {

namespace {

void require_rank2(const LatticeShape& shape) {
  if (shape.rank() != 2) {
    throw Error(ErrorCode::UnsupportedLattice,
                "concliques are implemented for two-dimensional lattices only, got rank " +
                    std::to_string(shape.rank()));
  }
}

}  // namespace

LatticeShape::LatticeShape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidShape, "lattice needs at least one axis");
  cardinality_ = 1;
  for (int n : dims_) {
    if (n <= 0) {
      throw Error(ErrorCode::InvalidShape,
                  "lattice side lengths must be positive, got " + std::to_string(n));
    }
    cardinality_ *= static_cast<std::size_t>(n);
  }
}

bool LatticeShape::contains(const Site& s) const noexcept {
  if (s.coords.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (s.coords[i] < 1 || s.coords[i] > dims_[i]) return false;
  }
  return true;
}

std::size_t LatticeShape::linear_index(const Site& s) const {
  if (!contains(s)) throw Error(ErrorCode::OutOfRange, "site outside lattice");
  std::size_t index = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    index = index * static_cast<std::size_t>(dims_[i]) + static_cast<std::size_t>(s.coords[i] - 1);
  }
  return index;
}

Site LatticeShape::site_at(std::size_t index) const {
  if (index >= cardinality_) throw Error(ErrorCode::OutOfRange, "linear index outside lattice");
  Site s{std::vector<int>(dims_.size())};
  for (std::size_t i = dims_.size(); i-- > 0;) {
    const auto n = static_cast<std::size_t>(dims_[i]);
    s.coords[i] = static_cast<int>(index % n) + 1;
    index /= n;
  }
  return s;
}

bool LatticeShape::satisfies_aspect_ratio(double ratio) const noexcept {
  const auto [lo, hi] = std::minmax_element(dims_.begin(), dims_.end());
  return *lo >= ratio * *hi;
}

LatticeShape square_lattice(int side) { return LatticeShape({side, side}); }

std::vector<Site> build_index_set(const LatticeShape& shape) {
  std::vector<Site> sites;
  sites.reserve(shape.cardinality());
  for (std::size_t i = 0; i < shape.cardinality(); ++i) sites.push_back(shape.site_at(i));
  return sites;
}

std::vector<Site> four_neighbors(const Site& s, const LatticeShape& shape) {
  if (!shape.contains(s)) throw Error(ErrorCode::OutOfRange, "site outside lattice");
  std::vector<Site> out;
  for (std::size_t axis = 0; axis < s.coords.size(); ++axis) {
    for (int step : {-1, 1}) {
      Site t = s;
      t.coords[axis] += step;
      if (shape.contains(t)) out.push_back(std::move(t));
    }
  }
  return out;
}

ConcliquePair concliques(const LatticeShape& shape) {
  require_rank2(shape);
  ConcliquePair pair;
  for (auto& s : build_index_set(shape)) {
    const bool even = (s.coords[0] + s.coords[1]) % 2 == 0;
    (even ? pair.c1 : pair.c2).push_back(std::move(s));
  }
  return pair;
}

NeighborTable::NeighborTable(const LatticeShape& shape) {
  offsets_.reserve(shape.cardinality() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < shape.cardinality(); ++i) {
    for (const Site& t : four_neighbors(shape.site_at(i), shape)) {
      flat_.push_back(shape.linear_index(t));
    }
    offsets_.push_back(flat_.size());
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> conclique_indices(
    const LatticeShape& shape) {
  require_rank2(shape);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  const auto cols = static_cast<std::size_t>(shape.dim(1));
  for (std::size_t i = 0; i < shape.cardinality(); ++i) {
    const bool even = ((i / cols) + (i % cols)) % 2 == 0;
    (even ? out.first : out.second).push_back(i);
  }
  return out;
}

TrainValidateSplit partition_train_validate(const LatticeShape& shape, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::DegenerateSplit, "train fraction must lie in (0, 1)");
  }
  std::vector<int> limits;
  for (int n : shape.dims()) limits.push_back(static_cast<int>(std::floor(fraction * n)));
  TrainValidateSplit split;
  for (auto& s : build_index_set(shape)) {
    bool inside = true;
    for (std::size_t i = 0; i < limits.size(); ++i) inside = inside && s.coords[i] <= limits[i];
    (inside ? split.train : split.validate).push_back(std::move(s));
  }
  if (split.train.empty() || split.validate.empty()) {
    throw Error(ErrorCode::DegenerateSplit, "train/validate split leaves one side empty");
  }
  return split;
}

}  // namespace wde
