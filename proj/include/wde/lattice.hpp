#pragma once

#include <cstddef>
#include <compare>
#include <utility>
#include <vector>

namespace wde {

/// One lattice point s with 1-based coordinates 1 <= s_i <= n_i.
struct Site {
  std::vector<int> coords;

  auto operator<=>(const Site&) const = default;
};

/// Rectangular index set I_n = {s : 1 <= s <= n} on Z^N.
class LatticeShape {
 public:
  explicit LatticeShape(std::vector<int> dims);

  int rank() const noexcept { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  int dim(int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }

  /// |I_n|, the product of all side lengths.
  std::size_t cardinality() const noexcept { return cardinality_; }

  bool contains(const Site& s) const noexcept;

  /// Row-major position of a site; the last coordinate varies fastest.
  std::size_t linear_index(const Site& s) const;
  Site site_at(std::size_t index) const;

  /// min n_i >= ratio * max n_i. Only advisory; callers may warn.
  bool satisfies_aspect_ratio(double ratio) const noexcept;

  bool operator==(const LatticeShape&) const = default;

 private:
  std::vector<int> dims_;
  std::size_t cardinality_ = 0;
};

/// Convenience for the square two-dimensional lattices of the simulation study.
LatticeShape square_lattice(int side);

/// All sites in row-major order.
std::vector<Site> build_index_set(const LatticeShape& shape);

/// Sites at L1 distance one inside the shape (free boundary).
std::vector<Site> four_neighbors(const Site& s, const LatticeShape& shape);

struct ConcliquePair {
  std::vector<Site> c1;  // even coordinate sum
  std::vector<Site> c2;  // odd coordinate sum
};

ConcliquePair concliques(const LatticeShape& shape);

/// Neighbour lists in linear indices, precomputed once per shape.
class NeighborTable {
 public:
  explicit NeighborTable(const LatticeShape& shape);

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t degree(std::size_t site) const noexcept {
    return offsets_[site + 1] - offsets_[site];
  }
  const std::size_t* begin(std::size_t site) const noexcept {
    return flat_.data() + offsets_[site];
  }
  const std::size_t* end(std::size_t site) const noexcept {
    return flat_.data() + offsets_[site + 1];
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> flat_;
};

/// Linear indices of the two concliques, each in row-major order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> conclique_indices(
    const LatticeShape& shape);

struct TrainValidateSplit {
  std::vector<Site> train;     // {s : s_i <= floor(fraction * n_i)}
  std::vector<Site> validate;  // the complement, L-shaped for N = 2
};

TrainValidateSplit partition_train_validate(const LatticeShape& shape,
                                            double fraction = 0.9);

}  // namespace wde
