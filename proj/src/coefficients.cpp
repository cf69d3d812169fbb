#include "wde/coefficients.hpp"

#include <algorithm>

#include "wde/error.hpp"

namespace wde {

std::size_t TranslationHash::operator()(const Translation& t) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::int32_t c : t) {
    h ^= static_cast<std::uint32_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

Translation make_translation(std::span<const int> gamma) {
  if (gamma.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::Unsupported, "translations are limited to four dimensions");
  }
  Translation t{};
  std::copy(gamma.begin(), gamma.end(), t.begin());
  return t;
}

std::vector<int> translation_vector(const Translation& t, int d) {
  return std::vector<int>(t.begin(), t.begin() + d);
}

int CoefficientSet::fine_level() const noexcept {
  return detail.empty() ? coarse_level : detail.rbegin()->first + 1;
}

std::size_t CoefficientSet::detail_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [j, per_k] : detail) {
    for (const auto& m : per_k) n += m.size();
  }
  return n;
}

double CoefficientSet::sum_of_squares() const noexcept {
  double acc = 0.0;
  for (const auto& [g, v] : father) acc += v * v;
  for (const auto& [j, per_k] : detail) {
    for (const auto& m : per_k) {
      for (const auto& [g, v] : m) acc += v * v;
    }
  }
  return acc;
}

std::vector<std::pair<Translation, double>> sorted_entries(const CoeffMap& m) {
  std::vector<std::pair<Translation, double>> out(m.begin(), m.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace wde
