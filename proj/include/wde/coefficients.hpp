#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

namespace wde {

inline constexpr int kMaxDim = 4;

/// gamma in Z^d padded with zeros up to kMaxDim.
using Translation = std::array<std::int32_t, kMaxDim>;

struct TranslationHash {
  std::size_t operator()(const Translation& t) const noexcept;
};

using CoeffMap = std::unordered_map<Translation, double, TranslationHash>;

Translation make_translation(std::span<const int> gamma);
std::vector<int> translation_vector(const Translation& t, int d);

/// theta_{j0,gamma} for the coarse level plus upsilon_{k,j,gamma} for the
/// stored detail levels. detail[j][k-1] holds mother k.
struct CoefficientSet {
  int dim = 0;
  int coarse_level = 0;
  CoeffMap father;
  std::map<int, std::vector<CoeffMap>> detail;

  /// One past the largest stored detail level; coarse_level if none.
  int fine_level() const noexcept;
  std::size_t detail_count() const noexcept;
  double sum_of_squares() const noexcept;
  bool empty() const noexcept { return father.empty() && detail_count() == 0; }
};

/// Ordered copy of a map, for deterministic iteration and output.
std::vector<std::pair<Translation, double>> sorted_entries(const CoeffMap& m);

}  // namespace wde
