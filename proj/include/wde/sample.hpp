#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wde/error.hpp"

namespace wde {

/// Site-indexed observations Z(s) in R^d, stored row by row.
class Sample {
 public:
  Sample() = default;
  Sample(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ <= 0 || coords_.size() % static_cast<std::size_t>(dim_) != 0) {
      throw Error(ErrorCode::InvalidArgument, "sample coordinates do not match the dimension");
    }
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept {
    return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_);
  }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Points at the given positions, in that order.
  Sample subset(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * static_cast<std::size_t>(dim_));
    for (std::size_t i : indices) {
      const auto p = point(i);
      out.insert(out.end(), p.begin(), p.end());
    }
    return Sample(dim_, std::move(out));
  }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

}  // namespace wde
